#include "iif/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "iif/error.hpp"

namespace iif::io {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

// Splits one record; quoted fields may contain the delimiter and doubled quotes.
std::vector<std::string> split_record(const std::string& line, char delim, std::size_t row) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false, was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"' && trim(cur).empty()) {
            quoted = was_quoted = true;
            cur.clear();
        } else if (ch == delim) {
            out.push_back(was_quoted ? cur : trim(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur += ch;
        }
    }
    if (quoted) throw ParseError("row " + std::to_string(row) + ": unterminated quoted field");
    out.push_back(was_quoted ? cur : trim(cur));
    return out;
}

bool parse_double(const std::string& cell, double& value) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last;
}

char pick_delimiter(const std::string& path, const std::string& first_line) {
    const auto ext = std::filesystem::path(path).extension().string();
    if (ext == ".tsv" || ext == ".tab") return '\t';
    if (ext == ".csv") return ',';
    return first_line.find('\t') != std::string::npos ? '\t' : ',';
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string quote_csv(const std::string& field) {
    if (field.find_first_of(",\t\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    auto out = open_out(path);
    out << content;
    if (!out) throw ParseError("failed writing '" + path + "'");
}

DataMatrix load_matrix(const std::string& path, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");

    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        lines.push_back(std::move(line));
    }
    if (lines.empty()) throw ParseError("'" + path + "' contains no data");

    const char delim = options.delimiter != 0 ? options.delimiter : pick_delimiter(path, lines.front());
    std::vector<std::vector<std::string>> rows;
    rows.reserve(lines.size());
    for (std::size_t r = 0; r < lines.size(); ++r) rows.push_back(split_record(lines[r], delim, r + 1));

    bool header = false;
    if (options.has_header) {
        header = *options.has_header;
    } else {
        double tmp;
        for (std::size_t c = 0; c < rows.front().size() && !header; ++c) {
            // A blank leading corner cell is common above a row-id column.
            if (c == 0 && rows.front()[c].empty()) continue;
            header = !parse_double(rows.front()[c], tmp);
        }
    }
    const std::size_t first_data = header ? 1 : 0;
    if (rows.size() <= first_data) throw ParseError("'" + path + "' has a header but no data rows");

    double tmp;
    const bool row_id_column = !parse_double(rows[first_data].front(), tmp);
    const std::size_t width = rows[first_data].size();
    const std::size_t offset = row_id_column ? 1 : 0;

    DataMatrix dm;
    const std::size_t n_rows = rows.size() - first_data;
    const std::size_t n_cols = width - offset;
    if (header) {
        const auto& h = rows.front();
        if (h.size() != width && h.size() != n_cols) {
            throw ParseError("row 1: header has " + std::to_string(h.size()) + " fields, expected " +
                             std::to_string(width));
        }
        dm.col_ids.assign(h.end() - static_cast<std::ptrdiff_t>(n_cols), h.end());
    }

    Matrix values(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
    for (std::size_t r = 0; r < n_rows; ++r) {
        const auto& row = rows[first_data + r];
        const std::size_t file_row = first_data + r + 1;
        if (row.size() != width) {
            throw ParseError("row " + std::to_string(file_row) + ": expected " + std::to_string(width) +
                             " fields, found " + std::to_string(row.size()));
        }
        if (row_id_column) dm.row_ids.push_back(row.front());
        for (std::size_t c = 0; c < n_cols; ++c) {
            double v;
            const std::string& cell = row[c + offset];
            if (!parse_double(cell, v)) {
                throw ParseError("row " + std::to_string(file_row) + ", column " + std::to_string(c + offset + 1) +
                                 ": non-numeric cell '" + cell + "'");
            }
            if (!std::isfinite(v)) {
                throw ParseError("row " + std::to_string(file_row) + ", column " + std::to_string(c + offset + 1) +
                                 ": non-finite value");
            }
            if (options.log1p) {
                if (v < 0.0) {
                    throw ParseError("row " + std::to_string(file_row) + ", column " +
                                     std::to_string(c + offset + 1) + ": negative value under log1p");
                }
                v = std::log1p(v);
            }
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }

    if (options.transpose) {
        dm.values = values.transpose();
        std::swap(dm.row_ids, dm.col_ids);
    } else {
        dm.values = std::move(values);
    }
    dm.log1p = options.log1p;
    dm.transposed = options.transpose;
    if (dm.values.rows() < 2 || dm.values.cols() < 2) throw ParseError("matrix must be at least 2 x 2");
    return dm;
}

void save_matrix(const std::string& path, const Matrix& values, const std::vector<std::string>& col_ids, char delimiter) {
    auto out = open_out(path);
    if (!col_ids.empty()) {
        if (col_ids.size() != static_cast<std::size_t>(values.cols())) {
            throw DomainError("save_matrix: column id count does not match the matrix");
        }
        for (std::size_t c = 0; c < col_ids.size(); ++c) out << (c ? std::string(1, delimiter) : "") << quote_csv(col_ids[c]);
        out << '\n';
    }
    std::string line;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        line.clear();
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (j) line += delimiter;
            line += format_double(values(i, j));
        }
        line += '\n';
        out << line;
    }
    if (!out) throw ParseError("failed writing '" + path + "'");
}

void write_labels(const std::string& path, const Labels& labels) {
    auto out = open_out(path);
    for (int l : labels) out << (l + 1) << '\n';
}

Labels read_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::vector<std::string> tokens;
    for (std::string line; std::getline(in, line);) {
        std::string t = trim(line);
        if (!t.empty()) tokens.push_back(std::move(t));
    }
    if (tokens.empty()) throw ParseError("'" + path + "' contains no labels");

    bool all_int = true;
    std::vector<long> ints(tokens.size());
    for (std::size_t i = 0; i < tokens.size() && all_int; ++i) {
        const auto& t = tokens[i];
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), ints[i]);
        all_int = ec == std::errc() && ptr == t.data() + t.size();
    }

    Labels out(tokens.size());
    if (all_int) {
        std::map<long, int> code;
        for (long v : ints) code.emplace(v, 0);
        int next = 0;
        for (auto& [v, c] : code) c = next++;
        for (std::size_t i = 0; i < ints.size(); ++i) out[i] = code[ints[i]];
    } else {
        std::map<std::string, int> code;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            auto [it, added] = code.emplace(tokens[i], static_cast<int>(code.size()));
            out[i] = it->second;
        }
    }
    return out;
}

void write_features(const std::string& path, const FeatureSet& features, const std::vector<std::string>& col_ids) {
    auto out = open_out(path);
    for (std::size_t j : features.indices) {
        out << (j + 1);
        if (!col_ids.empty()) out << ',' << quote_csv(col_ids.at(j));
        out << '\n';
    }
}

FeatureSet read_features(const std::string& path, std::size_t p) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    FeatureSet fs;
    std::size_t row = 0;
    for (std::string line; std::getline(in, line);) {
        ++row;
        const std::string t = trim(line.substr(0, line.find(',')));
        if (t.empty()) continue;
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || ptr != t.data() + t.size() || v < 1 || v > p) {
            throw ParseError("row " + std::to_string(row) + ": invalid feature index '" + t + "'");
        }
        fs.indices.push_back(v - 1);
    }
    std::sort(fs.indices.begin(), fs.indices.end());
    fs.indices.erase(std::unique(fs.indices.begin(), fs.indices.end()), fs.indices.end());
    return fs;
}

Json spec_to_json(datagen::Setting setting, const datagen::SyntheticSpec& spec, const datagen::ManifoldParams& params) {
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["setting"] = datagen::to_string(setting);
    j["n"] = spec.n;
    j["p"] = spec.p;
    j["n_strong"] = spec.n_strong;
    j["n_weak"] = spec.n_weak;
    j["tau_s"] = spec.tau_s;
    j["tau_w"] = spec.tau_w;
    j["sigma_lo"] = spec.sigma_lo;
    j["sigma_hi"] = spec.sigma_hi;
    j["power"] = spec.power;
    j["seed"] = spec.seed;
    if (setting != datagen::Setting::linear) {
        j["manifold"] = {{"jitter", params.jitter}, {"frequency", params.frequency}, {"noise_sd", params.noise_sd}};
    }
    return j;
}

void spec_from_json(const Json& j, datagen::Setting& setting, datagen::SyntheticSpec& spec,
                    datagen::ManifoldParams& params) {
    try {
        setting = datagen::setting_from_string(j.at("setting").get<std::string>());
        spec = datagen::defaults_for(setting);
        spec.n = j.value("n", spec.n);
        spec.p = j.value("p", spec.p);
        spec.n_strong = j.value("n_strong", spec.n_strong);
        spec.n_weak = j.value("n_weak", spec.n_weak);
        spec.tau_s = j.value("tau_s", spec.tau_s);
        spec.tau_w = j.value("tau_w", spec.tau_w);
        spec.sigma_lo = j.value("sigma_lo", spec.sigma_lo);
        spec.sigma_hi = j.value("sigma_hi", spec.sigma_hi);
        spec.power = j.value("power", spec.power);
        spec.seed = j.value("seed", spec.seed);
        params = {};
        if (j.contains("manifold")) {
            const auto& m = j.at("manifold");
            params.jitter = m.value("jitter", params.jitter);
            params.frequency = m.value("frequency", params.frequency);
            params.noise_sd = m.value("noise_sd", params.noise_sd);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid synthetic spec: ") + e.what());
    }
}

void write_instance(const std::string& dir, const datagen::SyntheticInstance& inst,
                    const datagen::ManifoldParams& params) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    save_matrix((base / "x.csv").string(), inst.x);
    write_labels((base / "labels.txt").string(), inst.truth);
    write_features((base / "features.txt").string(), inst.influential());
    write_features((base / "strong.txt").string(), inst.strong);
    write_features((base / "weak.txt").string(), inst.weak);
    write_file((base / "spec.json").string(), spec_to_json(inst.setting, inst.spec, params).dump(2) + "\n");
}

Json build_report(const ReportInputs& in) {
    if (in.config == nullptr || in.result == nullptr) throw DomainError("build_report: config and result are required");
    const auto& cfg = *in.config;
    const auto& res = *in.result;

    Json r;
    r["schema_version"] = kReportSchemaVersion;
    r["library_version"] = kLibraryVersion;
    r["seed"] = cfg.seed;

    Json c;
    c["variant"] = pipeline::to_string(cfg.variant);
    c["k"] = cfg.k;
    c["max_iter"] = cfg.max_iter;
    c["stop_ratio"] = cfg.stop_ratio;
    c["c"] = cfg.c_default;
    c["null_seed"] = cfg.null_seed;
    c["ks_null_columns"] = cfg.ks_null_columns;
    c["f_null_draws"] = cfg.f_null_draws;
    c["change_rule"] = cfg.change_rule == pipeline::ChangeRule::additions ? "additions" : "symmetric";
    c["f_labels"] = cfg.f_labels == pipeline::FLabelSource::previous ? "previous" : "initial";
    c["embedding"] = {{"gamma", cfg.embedding.gamma},
                      {"n_neighbors", cfg.embedding.n_neighbors},
                      {"eig_tol", cfg.embedding.eig_tol}};
    c["kmeans"] = {{"restarts", cfg.kmeans.restarts}, {"max_iter", cfg.kmeans.max_iter}, {"tol", cfg.kmeans.tol}};
    r["config"] = c;

    if (in.data != nullptr) {
        r["data"] = {{"input", in.input_path},
                     {"n", in.data->values.rows()},
                     {"p", in.data->values.cols()},
                     {"log1p", in.data->log1p},
                     {"transposed", in.data->transposed}};
    }

    Json features = Json::array();
    for (std::size_t j : res.features.indices) features.push_back(j + 1);
    Json init_features = Json::array();
    for (std::size_t j : res.init.features.indices) init_features.push_back(j + 1);
    r["result"] = {{"terminated_by", pipeline::to_string(res.terminated_by)},
                   {"iterations", res.trace.size()},
                   {"n_features", res.features.size()},
                   {"features", features},
                   {"init", {{"n_features", res.init.features.size()},
                             {"threshold", res.init.threshold},
                             {"fallback", res.init.selection_fallback},
                             {"features", init_features}}}};

    Json trace = Json::array();
    for (const auto& t : res.trace) {
        trace.push_back({{"iteration", t.iteration},
                         {"n_features", t.n_features},
                         {"change_ratio", t.change_ratio},
                         {"raw_w", t.raw_w},
                         {"omega", t.omega},
                         {"p1", t.p1},
                         {"hc_stat", t.hc_stat},
                         {"threshold", t.threshold},
                         {"inertia", t.inertia},
                         {"reliability_uninformative", t.reliability_uninformative},
                         {"selection_fallback", t.selection_fallback},
                         {"degenerate_f", t.degenerate_f}});
    }
    r["trace"] = trace;

    if (in.accuracy || in.ari || in.features) {
        Json m;
        if (in.accuracy) m["accuracy"] = *in.accuracy;
        if (in.ari) m["ari"] = *in.ari;
        if (in.features) {
            m["fdr"] = in.features->fdr;
            m["tdr"] = in.features->tdr;
            m["tpr"] = optional_number(in.features->tpr);
            m["fpr"] = optional_number(in.features->fpr);
        }
        r["metrics"] = m;
    }
    if (in.load_seconds || in.fit_seconds) {
        r["timings"] = {{"load_seconds", in.load_seconds.value_or(0.0)}, {"fit_seconds", in.fit_seconds.value_or(0.0)}};
    }
    return r;
}

std::string dump_report(const Json& report) { return report.dump(2) + "\n"; }

Json parse_report(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid report: ") + e.what());
    }
    if (!j.is_object() || !j.contains("schema_version") || j["schema_version"] != kReportSchemaVersion) {
        throw ParseError("report schema version mismatch");
    }
    return j;
}

}  // namespace iif::io
