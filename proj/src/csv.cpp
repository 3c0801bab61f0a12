#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "trusthmd/data.hpp"

namespace trusthmd {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// One CSV record. Supports double-quoted fields with "" escapes; embedded
// newlines are not supported.
std::vector<std::string> split_record(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw Error("line " + std::to_string(line_no) + ": unterminated quoted field");
    fields.emplace_back(trim(cur));
    return fields;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw Error("missing column '" + name + "'");
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

Dataset parse_csv(std::string_view text, const CsvSchema& schema, const std::vector<std::string>& class_names) {
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos <= text.size();) {
        const std::size_t nl = text.find('\n', pos);
        const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
        lines.push_back(text.substr(pos, end - pos));
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    std::size_t first = 0;
    while (first < lines.size() && trim(lines[first]).empty()) ++first;
    if (first == lines.size()) throw Error("empty CSV (no header row)");

    const std::vector<std::string> header = split_record(lines[first], first + 1);
    std::optional<std::size_t> label_col;
    std::optional<std::size_t> app_col;
    if (schema.label_column) label_col = column_index(header, *schema.label_column);
    if (schema.app_id_column) app_col = column_index(header, *schema.app_id_column);
    std::vector<std::size_t> feature_cols;
    std::vector<std::string> feature_names;
    if (schema.feature_columns.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i != label_col && i != app_col) {
                feature_cols.push_back(i);
                feature_names.push_back(header[i]);
            }
        }
    } else {
        for (const std::string& name : schema.feature_columns) {
            feature_cols.push_back(column_index(header, name));
            feature_names.push_back(name);
        }
    }
    if (feature_cols.empty()) throw Error("CSV has no feature columns");

    std::map<std::string, Label, std::less<>> class_index;
    for (std::size_t k = 0; k < class_names.size(); ++k) class_index[class_names[k]] = static_cast<Label>(k);

    std::vector<Sample> samples;
    std::vector<std::size_t> non_finite_lines;
    for (std::size_t li = first + 1; li < lines.size(); ++li) {
        if (trim(lines[li]).empty()) continue;
        const std::size_t line_no = li + 1;
        const std::vector<std::string> fields = split_record(lines[li], line_no);
        if (fields.size() != header.size()) {
            throw Error("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(fields.size()));
        }
        Sample s;
        s.features.reserve(feature_cols.size());
        bool finite = true;
        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            double v = 0.0;
            if (!parse_double(fields[feature_cols[f]], v)) {
                throw Error("line " + std::to_string(line_no) + ", column '" + feature_names[f] +
                            "': unparsable value '" + fields[feature_cols[f]] + "'");
            }
            finite = finite && std::isfinite(v);
            s.features.push_back(v);
        }
        if (!finite) non_finite_lines.push_back(line_no);
        if (label_col && !fields[*label_col].empty()) {
            const auto it = class_index.find(fields[*label_col]);
            if (it == class_index.end()) {
                throw Error("line " + std::to_string(line_no) + ": label '" + fields[*label_col] +
                            "' is not a declared class");
            }
            s.label = it->second;
        }
        s.app_id = app_col ? fields[*app_col] : "row-" + std::to_string(line_no);
        if (s.app_id.empty()) throw Error("line " + std::to_string(line_no) + ": empty app id");
        samples.push_back(std::move(s));
    }
    if (!non_finite_lines.empty()) {
        std::string msg = "non-finite feature values on line(s)";
        for (std::size_t l : non_finite_lines) msg += " " + std::to_string(l);
        throw Error(msg);
    }
    if (samples.empty()) throw Error("CSV has a header but no data rows");
    return Dataset(std::move(samples), feature_cols.size(), class_names);
}

Dataset load_csv(const std::string& path, const CsvSchema& schema, const std::vector<std::string>& class_names) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_csv(buf.str(), schema, class_names);
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

void write_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    for (std::size_t j = 0; j < data.dim(); ++j) out << 'f' << j << ',';
    out << "label,app\n";
    for (const Sample& s : data.samples()) {
        for (double v : s.features) out << format_double(v) << ',';
        if (s.label) out << data.class_names()[static_cast<std::size_t>(*s.label)];
        out << ',' << s.app_id << '\n';
    }
    if (!out) throw Error("failed writing '" + path + "'");
}

Label Manifest::positive_label() const {
    for (std::size_t k = 0; k < classes.size(); ++k) {
        if (classes[k] == positive_class) return static_cast<Label>(k);
    }
    throw Error("positive class '" + positive_class + "' is not among the declared classes");
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
        Manifest m;
        if (j.contains("format") && j["format"] != "trusthmd-manifest/1") {
            throw Error("unsupported manifest format " + j["format"].dump());
        }
        m.classes = j.at("classes").get<std::vector<std::string>>();
        m.positive_class = j.value("positive_class", m.classes.size() > 1 ? m.classes[1] : std::string());
        const auto optional_column = [&](const char* key, std::optional<std::string> fallback) {
            if (!j.contains(key)) return fallback;
            if (j[key].is_null()) return std::optional<std::string>();
            return std::optional<std::string>(j[key].get<std::string>());
        };
        m.schema.label_column = optional_column("label_column", m.schema.label_column);
        m.schema.app_id_column = optional_column("app_id_column", m.schema.app_id_column);
        m.schema.feature_columns = j.value("feature_columns", std::vector<std::string>{});
        m.unknown_app_ids = j.value("unknown_app_ids", std::vector<std::string>{});
        m.test_fraction = j.value("test_fraction", m.test_fraction);
        m.split_seed = j.value("split_seed", m.split_seed);
        if (m.classes.size() < 2) throw Error("manifest must declare at least 2 classes");
        m.positive_label();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error("manifest '" + path + "': " + e.what());
    }
}

void save_manifest(const Manifest& m, const std::string& path) {
    nlohmann::ordered_json j;
    j["format"] = "trusthmd-manifest/1";
    j["classes"] = m.classes;
    j["positive_class"] = m.positive_class;
    j["label_column"] = m.schema.label_column ? nlohmann::ordered_json(*m.schema.label_column) : nullptr;
    j["app_id_column"] = m.schema.app_id_column ? nlohmann::ordered_json(*m.schema.app_id_column) : nullptr;
    j["feature_columns"] = m.schema.feature_columns;
    j["unknown_app_ids"] = m.unknown_app_ids;
    j["test_fraction"] = m.test_fraction;
    j["split_seed"] = m.split_seed;
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace trusthmd
