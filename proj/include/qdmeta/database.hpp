#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "qdmeta/archive.hpp"

namespace qdmeta {

/// Fixed-capacity FIFO store of evaluated solutions. Once full, every insert
/// overwrites the oldest entry.
class CircularDatabase {
public:
    explicit CircularDatabase(std::size_t capacity);

    void insert(Solution s);

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }
    bool full() const { return entries_.size() == capacity_; }
    /// Slot the next insert writes to once the buffer is full.
    std::size_t write_cursor() const { return cursor_; }
    std::size_t total_inserted() const { return total_inserted_; }

    /// i-th oldest surviving entry.
    const Solution& operator[](std::size_t i) const;

    /// Visits every stored solution once, oldest first.
    template <typename F>
    void for_each(F&& f) const {
        const std::size_t n = entries_.size();
        const std::size_t start = full() ? cursor_ : 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t slot = start + i;
            if (slot >= n) slot -= n;
            f(entries_[slot]);
        }
    }

    std::vector<Solution> snapshot() const;

    /// Rebuilds a database from its oldest-first contents.
    static CircularDatabase restore(std::size_t capacity, std::vector<Solution> oldest_first,
                                    std::size_t total_inserted);

    /// Logical equality: same capacity and the same entries in the same age order.
    bool operator==(const CircularDatabase& other) const;

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::size_t total_inserted_ = 0;
    std::vector<Solution> entries_;
};

/// Checkpoint in the archive line format (cell column holds the entry's age rank).
void write_database(std::ostream& os, const CircularDatabase& db);
CircularDatabase read_database(std::istream& is);

}  // namespace qdmeta
