#include "schemalink/subset.hpp"

#include <algorithm>

#include "schemalink/text.hpp"

namespace schemalink {

bool SchemaSubset::add_table(std::string_view table) {
    std::string key = fold_case(table);
    auto it = index_.find(key);
    if (it != index_.end()) return false;
    index_.emplace(std::move(key), tables_.size());
    tables_.push_back(Table{std::string(table), {}});
    folded_columns_.emplace_back();
    return true;
}

bool SchemaSubset::add(std::string_view table, std::string_view column) {
    std::string key = fold_case(table);
    std::size_t slot;
    auto it = index_.find(key);
    if (it == index_.end()) {
        slot = tables_.size();
        index_.emplace(std::move(key), slot);
        tables_.push_back(Table{std::string(table), {}});
        folded_columns_.emplace_back();
    } else {
        slot = it->second;
    }
    auto [_, inserted] = folded_columns_[slot].insert(fold_case(column));
    if (inserted) tables_[slot].columns.emplace_back(column);
    return inserted;
}

bool SchemaSubset::has_table(std::string_view table) const {
    return index_.contains(fold_case(table));
}

bool SchemaSubset::has_column(std::string_view table, std::string_view column) const {
    auto it = index_.find(fold_case(table));
    if (it == index_.end()) return false;
    return folded_columns_[it->second].contains(fold_case(column));
}

const SchemaSubset::Table* SchemaSubset::find_table(std::string_view table) const {
    auto it = index_.find(fold_case(table));
    if (it == index_.end()) return nullptr;
    return &tables_[it->second];
}

std::size_t SchemaSubset::column_pair_count() const {
    std::size_t n = 0;
    for (const auto& t : tables_) n += t.columns.size();
    return n;
}

void SchemaSubset::merge(const SchemaSubset& other) {
    for (const auto& t : other.tables_) {
        if (t.columns.empty()) {
            add_table(t.name);
        } else {
            for (const auto& c : t.columns) add(t.name, c);
        }
    }
}

bool SchemaSubset::contains(const SchemaSubset& other) const {
    for (const auto& t : other.tables_) {
        if (!has_table(t.name)) return false;
        for (const auto& c : t.columns) {
            if (!has_column(t.name, c)) return false;
        }
    }
    return true;
}

void SchemaSubset::drop_empty_tables() {
    SchemaSubset kept;
    for (const auto& t : tables_) {
        for (const auto& c : t.columns) kept.add(t.name, c);
    }
    *this = std::move(kept);
}

std::vector<std::pair<std::string, std::string>> SchemaSubset::folded_pairs() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(column_pair_count());
    for (const auto& t : tables_) {
        std::string ft = fold_case(t.name);
        for (const auto& c : t.columns) out.emplace_back(ft, fold_case(c));
    }
    return out;
}

std::vector<std::string> SchemaSubset::folded_tables() const {
    std::vector<std::string> out;
    out.reserve(tables_.size());
    for (const auto& t : tables_) out.push_back(fold_case(t.name));
    return out;
}

nlohmann::ordered_json SchemaSubset::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& t : tables_) {
        j[t.name] = t.columns;
    }
    return j;
}

std::string SchemaSubset::canonical() const {
    std::vector<std::pair<std::string, const Table*>> order;
    order.reserve(tables_.size());
    for (const auto& t : tables_) order.emplace_back(fold_case(t.name), &t);
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [_, t] : order) {
        std::vector<std::string> cols = t->columns;
        std::sort(cols.begin(), cols.end(),
                  [](const std::string& a, const std::string& b) { return fold_case(a) < fold_case(b); });
        j[t->name] = cols;
    }
    return j.dump();
}

SchemaSubset SchemaSubset::from_json(const nlohmann::ordered_json& j) {
    SchemaSubset s;
    for (const auto& [table, cols] : j.items()) {
        if (!cols.is_array()) continue;
        bool any = false;
        for (const auto& c : cols) {
            if (!c.is_string()) continue;
            std::string name = trim(c.get<std::string>());
            if (name.empty()) continue;
            s.add(table, name);
            any = true;
        }
        if (!any) s.add_table(table);
    }
    return s;
}

bool operator==(const SchemaSubset& a, const SchemaSubset& b) {
    if (a.tables_.size() != b.tables_.size()) return false;
    if (a.column_pair_count() != b.column_pair_count()) return false;
    return a.contains(b) && b.contains(a);
}

SchemaSubset subset_union(const SchemaSubset& a, const SchemaSubset& b) {
    SchemaSubset out = a;
    out.merge(b);
    return out;
}

} // namespace schemalink
