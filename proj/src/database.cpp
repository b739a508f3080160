#include "qdmeta/database.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qdmeta {

CircularDatabase::CircularDatabase(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("database capacity must be positive");
}

void CircularDatabase::insert(Solution s) {
    ++total_inserted_;
    if (entries_.size() < capacity_) {
        entries_.push_back(std::move(s));
        return;
    }
    entries_[cursor_] = std::move(s);
    cursor_ = cursor_ + 1 == capacity_ ? 0 : cursor_ + 1;
}

const Solution& CircularDatabase::operator[](std::size_t i) const {
    if (i >= entries_.size()) throw std::out_of_range("database index out of range");
    std::size_t slot = (full() ? cursor_ : 0) + i;
    if (slot >= entries_.size()) slot -= entries_.size();
    return entries_[slot];
}

CircularDatabase CircularDatabase::restore(std::size_t capacity, std::vector<Solution> oldest_first,
                                           std::size_t total_inserted) {
    if (oldest_first.size() > capacity) throw std::invalid_argument("more entries than capacity");
    CircularDatabase db(capacity);
    db.entries_ = std::move(oldest_first);
    db.cursor_ = 0;
    db.total_inserted_ = total_inserted;
    return db;
}

bool CircularDatabase::operator==(const CircularDatabase& other) const {
    if (capacity_ != other.capacity_ || size() != other.size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
        if (!((*this)[i] == other[i])) return false;
    }
    return true;
}

std::vector<Solution> CircularDatabase::snapshot() const {
    std::vector<Solution> out;
    out.reserve(entries_.size());
    for_each([&](const Solution& s) { out.push_back(s); });
    return out;
}

void write_database(std::ostream& os, const CircularDatabase& db) {
    os << "# qdmeta-database capacity=" << db.capacity() << " inserted=" << db.total_inserted()
       << " count=" << db.size() << '\n';
    ArchiveFile f;
    f.kind = "grid";
    if (!db.empty()) {
        f.n_genes = db[0].genotype.size();
        f.n_base = db[0].base_features.size();
    }
    f.solutions = db.snapshot();
    f.cells.resize(f.solutions.size());
    for (std::size_t i = 0; i < f.cells.size(); ++i) f.cells[i] = i;
    write_archive(os, f);
}

CircularDatabase read_database(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("database line 1: missing header");
    std::istringstream hs(header);
    std::string hash, tag;
    hs >> hash >> tag;
    if (hash != "#" || tag != "qdmeta-database") throw std::runtime_error("database line 1: bad header");
    std::size_t capacity = 0, inserted = 0;
    std::string field;
    while (hs >> field) {
        auto eq = field.find('=');
        if (eq == std::string::npos) throw std::runtime_error("database line 1: bad header field");
        std::string key = field.substr(0, eq);
        std::size_t value = std::stoull(field.substr(eq + 1));
        if (key == "capacity") capacity = value;
        else if (key == "inserted") inserted = value;
    }
    ArchiveFile f;
    try {
        f = read_archive(is);
    } catch (const std::runtime_error& e) {
        // Line numbers inside the body are offset by the database header.
        throw std::runtime_error(std::string("database (after 1 header line) ") + e.what());
    }
    if (inserted < f.solutions.size()) throw std::runtime_error("database header: inconsistent insert count");
    return CircularDatabase::restore(capacity, std::move(f.solutions), inserted);
}

}  // namespace qdmeta
