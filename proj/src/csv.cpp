#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <set>

#include "r2vf/data.hpp"
#include "r2vf/error.hpp"
#include "r2vf/format.hpp"

namespace r2vf {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

bool Threshold::holds(double x) const {
    switch (op) {
        case Op::gt: return x > value;
        case Op::ge: return x >= value;
        case Op::lt: return x < value;
        case Op::le: return x <= value;
        case Op::eq: return x == value;
        case Op::ne: return x != value;
    }
    return false;
}

std::optional<Threshold> Threshold::parse(std::string_view text) {
    const auto pos = text.find_first_of("<>=!");
    if (pos == std::string_view::npos) return std::nullopt;
    Threshold t;
    std::size_t len = 1;
    const char c = text[pos];
    const bool eq_next = pos + 1 < text.size() && text[pos + 1] == '=';
    if (c == '>') t.op = eq_next ? Op::ge : Op::gt;
    else if (c == '<') t.op = eq_next ? Op::le : Op::lt;
    else if (c == '=' && eq_next) t.op = Op::eq;
    else if (c == '!' && eq_next) t.op = Op::ne;
    else throw InputError("malformed threshold expression '" + std::string(text) + "'");
    if (eq_next) len = 2;
    t.column = std::string(trim(text.substr(0, pos)));
    const auto rhs = parse_double(text.substr(pos + len));
    if (t.column.empty() || !rhs)
        throw InputError("malformed threshold expression '" + std::string(text) +
                         "' (expected <column> <op> <number>)");
    t.value = *rhs;
    return t;
}

TargetSpec TargetSpec::parse(std::string_view text) {
    TargetSpec spec;
    spec.threshold = Threshold::parse(text);
    spec.column = spec.threshold ? spec.threshold->column : std::string(trim(text));
    if (spec.column.empty()) throw InputError("empty target specification");
    return spec;
}

std::vector<std::vector<std::string>> read_csv_rows(std::istream& in) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) text.erase(0, 3);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool row_has_content = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                row_has_content = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                row_has_content = true;
                break;
            case '\r':
                break;
            case '\n':
                if (row_has_content || !field.empty()) {
                    row.push_back(std::move(field));
                    rows.push_back(std::move(row));
                }
                field.clear();
                row.clear();
                row_has_content = false;
                break;
            default:
                field += c;
                row_has_content = true;
        }
    }
    if (quoted) throw InputError("unterminated quoted CSV field");
    if (row_has_content || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

Dataset read_csv(std::istream& in, std::span<const FeatureSpec> specs, const std::optional<TargetSpec>& target) {
    const auto rows = read_csv_rows(in);
    Dataset data;
    if (target) data.target_name = target->threshold ? target->column + "_ind" : target->column;
    for (const auto& spec : specs) data.columns.push_back(Column{spec.name(), spec.kind(), {}, {}});
    if (rows.empty()) return data;

    const auto& header = rows.front();
    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < header.size(); ++c) index.emplace(std::string(trim(header[c])), c);
    auto locate = [&](const std::string& name) {
        const auto it = index.find(name);
        if (it == index.end()) throw InputError("missing column '" + name + "'");
        return it->second;
    };
    std::vector<std::size_t> where;
    for (const auto& spec : specs) where.push_back(locate(spec.name()));
    const std::optional<std::size_t> target_at = target ? std::optional(locate(target->column)) : std::nullopt;

    const std::size_t n = rows.size() - 1;
    for (auto& col : data.columns) (col.categorical() ? col.labels.reserve(n) : col.numbers.reserve(n));
    data.target.reserve(n);
    auto number = [&](std::size_t r, std::size_t c, const std::string& name) {
        const auto& cells = rows[r];
        const auto v = parse_double(cells[c]);
        if (!v || !std::isfinite(*v))
            throw InputError("data row " + std::to_string(r) + ", column '" + name + "': cannot parse '" + cells[c] +
                             "' as a number");
        return *v;
    };
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size())
            throw InputError("data row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                             " fields, header has " + std::to_string(header.size()));
        for (std::size_t s = 0; s < specs.size(); ++s) {
            auto& col = data.columns[s];
            if (col.categorical()) col.labels.emplace_back(trim(rows[r][where[s]]));
            else col.numbers.push_back(number(r, where[s], col.name));
        }
        if (target_at) {
            const double v = number(r, *target_at, target->column);
            data.target.push_back(target->threshold ? (target->threshold->holds(v) ? 1.0 : 0.0) : v);
        } else {
            data.target.push_back(0.0);
        }
    }
    data.row_ids.resize(n);
    for (std::size_t r = 0; r < n; ++r) data.row_ids[r] = r;
    return data;
}

Dataset load_csv(const std::string& path, std::span<const FeatureSpec> specs, const std::optional<TargetSpec>& target) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_csv(in, specs, target);
}

void write_csv(const Dataset& data, std::ostream& out) {
    for (const auto& c : data.columns) out << csv_escape(c.name) << ',';
    out << csv_escape(data.target_name) << '\n';
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (const auto& c : data.columns)
            out << (c.categorical() ? csv_escape(c.labels[r]) : format_double(c.numbers[r])) << ',';
        out << format_double(data.target[r]) << '\n';
    }
}

std::size_t count_unique(const std::string& path, const std::string& column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    const auto rows = read_csv_rows(in);
    if (rows.empty()) return 0;
    std::size_t at = rows.front().size();
    for (std::size_t c = 0; c < rows.front().size(); ++c)
        if (trim(rows.front()[c]) == column) at = c;
    if (at == rows.front().size()) throw InputError("missing column '" + column + "'");
    std::set<std::string> seen;
    for (std::size_t r = 1; r < rows.size(); ++r)
        if (at < rows[r].size()) seen.emplace(trim(rows[r][at]));
    return seen.size();
}

}  // namespace r2vf
