#include "ehe/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ehe/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace ehe {

// ---------------------------------------------------------------------------
// Small utilities
// ---------------------------------------------------------------------------

std::string fmt_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s, const std::string& where) {
    double v = 0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e)
        throw std::runtime_error(where + ": malformed number '" + s + "'");
    return v;
}

std::int64_t parse_int(const std::string& s, const std::string& where) {
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error(where + ": malformed integer '" + s + "'");
    return v;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> read_lines(const std::string& content) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : content) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) {
        if (cur.back() == '\r') cur.pop_back();
        lines.push_back(cur);
    }
    return lines;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

Dataset load_dataset(const std::string& stations_csv_path, const std::string& obs_csv_path) {
    Dataset ds;
    ds.provenance = {stations_csv_path, obs_csv_path};

    const auto st_lines = read_lines(read_file(stations_csv_path));
    if (st_lines.empty() || split_csv_line(st_lines[0]) !=
                                std::vector<std::string>{"id", "name", "lon", "lat", "elev_m"})
        throw std::runtime_error(stations_csv_path + ": expected header 'id,name,lon,lat,elev_m'");
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 1; i < st_lines.size(); ++i) {
        if (st_lines[i].empty()) continue;
        const std::string where = stations_csv_path + ":" + std::to_string(i + 1);
        const auto f = split_csv_line(st_lines[i]);
        if (f.size() != 5) throw std::runtime_error(where + ": expected 5 fields");
        Station s;
        s.id = f[0];
        s.name = f[1];
        s.longitude = parse_double(f[2], where);
        s.latitude = parse_double(f[3], where);
        s.elevation = parse_double(f[4], where);
        try {
            s.validate();
        } catch (const std::exception& e) {
            throw std::runtime_error(where + ": " + e.what());
        }
        if (index.contains(s.id)) throw std::runtime_error(where + ": duplicate station id '" + s.id + "'");
        index[s.id] = ds.stations.size();
        ds.stations.push_back(std::move(s));
    }
    if (ds.stations.empty()) throw std::runtime_error(stations_csv_path + ": no stations");

    struct Obs {
        std::int64_t serial;
        double value;
        std::size_t row;
    };
    std::vector<std::vector<Obs>> per_station(ds.stations.size());

    const auto obs_lines = read_lines(read_file(obs_csv_path));
    if (obs_lines.empty() || split_csv_line(obs_lines[0]) !=
                                 std::vector<std::string>{"station_id", "date", "tmax_c"})
        throw std::runtime_error(obs_csv_path + ": expected header 'station_id,date,tmax_c'");
    for (std::size_t i = 1; i < obs_lines.size(); ++i) {
        if (obs_lines[i].empty()) continue;
        const std::string where = obs_csv_path + ":" + std::to_string(i + 1);
        const auto f = split_csv_line(obs_lines[i]);
        if (f.size() != 3) throw std::runtime_error(where + ": expected 3 fields");
        const auto it = index.find(f[0]);
        if (it == index.end())
            throw std::runtime_error(where + ": unknown station id '" + f[0] + "'");
        Date d;
        try {
            d = parse_date(f[1]);
        } catch (const std::exception& e) {
            throw std::runtime_error(where + ": " + e.what());
        }
        double value = kMissing;
        if (!f[2].empty()) {
            value = parse_double(f[2], where);
            if (!(value >= -60.0 && value <= 60.0))
                throw std::runtime_error(where + ": temperature " + f[2] +
                                         " outside plausible range [-60, 60] C");
        }
        per_station[it->second].push_back({to_serial(d), value, i + 1});
    }

    // Sort stations by id for the canonical ordering.
    std::vector<std::size_t> order(ds.stations.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ds.stations[a].id < ds.stations[b].id; });

    Dataset out;
    out.provenance = ds.provenance;
    for (std::size_t oi : order) {
        auto& obs = per_station[oi];
        std::sort(obs.begin(), obs.end(), [](const Obs& a, const Obs& b) { return a.serial < b.serial; });
        for (std::size_t k = 1; k < obs.size(); ++k)
            if (obs[k].serial == obs[k - 1].serial)
                throw std::runtime_error(obs_csv_path + ":" + std::to_string(obs[k].row) +
                                         ": duplicate observation for station '" +
                                         ds.stations[oi].id + "'");
        StationSeries series;
        series.station = ds.stations[oi];
        if (!obs.empty()) {
            series.start_date = from_serial(obs.front().serial);
            const std::int64_t n = obs.back().serial - obs.front().serial + 1;
            series.tmax.assign(static_cast<std::size_t>(n), kMissing);
            for (const auto& o : obs)
                series.tmax[static_cast<std::size_t>(o.serial - obs.front().serial)] = o.value;
        }
        out.stations.push_back(ds.stations[oi]);
        out.series.push_back(std::move(series));
    }
    return out;
}

std::string canonical_stations_csv(const Dataset& ds) {
    std::string out = "id,name,lon,lat,elev_m\n";
    for (const auto& s : ds.stations) {
        out += csv_escape(s.id) + "," + csv_escape(s.name) + "," + fmt_double(s.longitude) + "," +
               fmt_double(s.latitude) + "," + fmt_double(s.elevation) + "\n";
    }
    return out;
}

std::string canonical_obs_csv(const Dataset& ds) {
    std::string out = "station_id,date,tmax_c\n";
    for (const auto& s : ds.series) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            out += csv_escape(s.station.id) + "," + format_date(s.date_at(i)) + ",";
            if (!is_missing(s.tmax[i])) out += fmt_double(s.tmax[i]);
            out += "\n";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

std::vector<Threshold> load_thresholds(const std::string& path) {
    const auto lines = read_lines(read_file(path));
    if (lines.empty() || split_csv_line(lines[0]) !=
                             std::vector<std::string>{"station_id", "q_c", "n_baseline_days"})
        throw std::runtime_error(path + ": expected header 'station_id,q_c,n_baseline_days'");
    std::vector<Threshold> out;
    std::set<std::string> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const std::string where = path + ":" + std::to_string(i + 1);
        const auto f = split_csv_line(lines[i]);
        if (f.size() != 3) throw std::runtime_error(where + ": expected 3 fields");
        Threshold t;
        t.station_id = f[0];
        t.q = parse_double(f[1], where);
        t.n_baseline_days = static_cast<std::size_t>(parse_int(f[2], where));
        if (!std::isfinite(t.q)) throw std::runtime_error(where + ": non-finite threshold");
        if (!seen.insert(t.station_id).second)
            throw std::runtime_error(where + ": duplicate threshold for '" + t.station_id + "'");
        out.push_back(std::move(t));
    }
    return out;
}

std::string thresholds_csv(const std::vector<Threshold>& thresholds) {
    std::string out = "station_id,q_c,n_baseline_days\n";
    for (const auto& t : thresholds)
        out += csv_escape(t.station_id) + "," + fmt_double(t.q) + "," +
               std::to_string(t.n_baseline_days) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

namespace {

std::string bool_text(bool b) { return b ? "true" : "false"; }

bool parse_bool(const std::string& s, const std::string& where) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw std::runtime_error(where + ": expected boolean, got '" + s + "'");
}

}  // namespace

RunConfig parse_run_config(const std::string& content, const RunConfig& base) {
    RunConfig cfg = base;
    const auto lines = read_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = lines[i];
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t");
            return s.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        const std::string where = "config line " + std::to_string(i + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error(where + ": expected 'key = value'");
        const std::string key = strip(line.substr(0, eq));
        const std::string val = strip(line.substr(eq + 1));

        auto& m = cfg.model;
        auto& s = cfg.sampler;
        if (key == "nu") m.nu = parse_double(val, where);
        else if (key == "effective_range_km") m.effective_range_km = parse_double(val, where);
        else if (key == "coef_prior_sd") m.coef_prior_sd = parse_double(val, where);
        else if (key == "annual_prior_sd") m.annual_prior_sd = parse_double(val, where);
        else if (key == "var_prior_shape") m.var_prior_shape = parse_double(val, where);
        else if (key == "var_prior_rate") m.var_prior_rate = parse_double(val, where);
        else if (key == "hypermean_prior_sd") m.hypermean_prior_sd = parse_double(val, where);
        else if (key == "exceed_on_equal") m.exceed_on_equal = parse_bool(val, where);
        else if (key == "ar_sign_literal") m.ar_sign_literal = parse_bool(val, where);
        else if (key == "elev_offset") m.scaling.elev_offset = parse_double(val, where);
        else if (key == "elev_scale") m.scaling.elev_scale = parse_double(val, where);
        else if (key == "lat_offset")
            m.scaling.lat_offset = val == "auto" ? CovariateScaling::kMissingLatOffset
                                                 : parse_double(val, where);
        else if (key == "lat_scale") m.scaling.lat_scale = parse_double(val, where);
        else if (key == "iterations") s.iterations = parse_int(val, where);
        else if (key == "burn_in") s.burn_in = parse_double(val, where);
        else if (key == "thin") s.thin = static_cast<int>(parse_int(val, where));
        else if (key == "seed") s.seed = static_cast<std::uint64_t>(parse_int(val, where));
        else if (key == "adapt_window") s.adapt_window = static_cast<int>(parse_int(val, where));
        else if (key == "target_accept") s.target_accept = parse_double(val, where);
        else if (key.starts_with("step_")) s.step_overrides[key.substr(5)] = parse_double(val, where);
        else throw std::runtime_error(where + ": unknown config key '" + key + "'");
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path, const RunConfig& base) {
    return parse_run_config(read_file(path), base);
}

std::string run_config_text(const RunConfig& cfg) {
    const auto& m = cfg.model;
    const auto& s = cfg.sampler;
    std::string out;
    auto kv = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    kv("nu", fmt_double(m.nu));
    kv("effective_range_km", fmt_double(m.effective_range_km));
    kv("coef_prior_sd", fmt_double(m.coef_prior_sd));
    kv("annual_prior_sd", fmt_double(m.annual_prior_sd));
    kv("var_prior_shape", fmt_double(m.var_prior_shape));
    kv("var_prior_rate", fmt_double(m.var_prior_rate));
    kv("hypermean_prior_sd", fmt_double(m.hypermean_prior_sd));
    kv("exceed_on_equal", bool_text(m.exceed_on_equal));
    kv("ar_sign_literal", bool_text(m.ar_sign_literal));
    kv("elev_offset", fmt_double(m.scaling.elev_offset));
    kv("elev_scale", fmt_double(m.scaling.elev_scale));
    kv("lat_offset", std::isnan(m.scaling.lat_offset) ? std::string("auto")
                                                      : fmt_double(m.scaling.lat_offset));
    kv("lat_scale", fmt_double(m.scaling.lat_scale));
    kv("iterations", std::to_string(s.iterations));
    kv("burn_in", fmt_double(s.burn_in));
    kv("thin", std::to_string(s.thin));
    kv("seed", std::to_string(s.seed));
    kv("adapt_window", std::to_string(s.adapt_window));
    kv("target_accept", fmt_double(s.target_accept));
    for (const auto& [k, v] : s.step_overrides) kv("step_" + k, fmt_double(v));
    return out;
}

// ---------------------------------------------------------------------------
// Chain persistence
// ---------------------------------------------------------------------------

namespace {

std::string matrix_csv(const std::vector<std::string>& cols,
                       const std::vector<std::int64_t>& iters,
                       const std::vector<std::vector<double>>& rows) {
    std::string out = "iter";
    for (const auto& c : cols) out += "," + csv_escape(c);
    out += "\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out += std::to_string(iters[r]);
        for (double v : rows[r]) out += "," + fmt_double(v);
        out += "\n";
    }
    return out;
}

std::string matrix_bin(const std::vector<std::vector<double>>& rows, std::size_t cols) {
    std::string out = "EHEBIN " + std::to_string(rows.size()) + " " + std::to_string(cols) + "\n";
    for (const auto& r : rows) {
        const auto* bytes = reinterpret_cast<const char*>(r.data());
        out.append(bytes, r.size() * sizeof(double));
    }
    return out;
}

std::vector<std::vector<double>> parse_matrix_csv(const std::string& content,
                                                  const std::string& where, std::size_t n_cols) {
    const auto lines = read_lines(content);
    if (lines.empty()) throw std::runtime_error(where + ": empty file");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = split_csv_line(lines[i]);
        if (f.size() != n_cols + 1)
            throw std::runtime_error(where + ": row " + std::to_string(i + 1) + " has " +
                                     std::to_string(f.size()) + " fields, expected " +
                                     std::to_string(n_cols + 1));
        std::vector<double> row(n_cols);
        for (std::size_t j = 0; j < n_cols; ++j) row[j] = parse_double(f[j + 1], where);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::vector<double>> parse_matrix_bin(const std::string& content,
                                                  const std::string& where, std::size_t n_cols) {
    const auto nl = content.find('\n');
    if (nl == std::string::npos || content.compare(0, 7, "EHEBIN ") != 0)
        throw std::runtime_error(where + ": bad binary field header");
    std::istringstream head(content.substr(7, nl - 7));
    std::size_t rows = 0, cols = 0;
    head >> rows >> cols;
    if (cols != n_cols) throw std::runtime_error(where + ": column count mismatch");
    const std::size_t need = rows * cols * sizeof(double);
    if (content.size() - nl - 1 != need) throw std::runtime_error(where + ": truncated binary field");
    std::vector<std::vector<double>> out(rows, std::vector<double>(cols));
    const char* ptr = content.data() + nl + 1;
    for (auto& r : out) {
        std::memcpy(r.data(), ptr, cols * sizeof(double));
        ptr += cols * sizeof(double);
    }
    return out;
}

constexpr std::size_t kNumScalars = 23;  // leading scalar block of parameter_names

std::vector<std::int64_t> draw_iterations(const SamplerConfig& sc, std::size_t n_draws) {
    std::vector<std::int64_t> iters(n_draws);
    const std::int64_t n_burn = sc.iterations - sc.n_post();
    for (std::size_t j = 0; j < n_draws; ++j)
        iters[j] = n_burn + static_cast<std::int64_t>(j + 1) * sc.thin;
    return iters;
}

}  // namespace

void save_chain(const std::string& dir, const PosteriorChain& chain, bool binary_fields) {
    fs::create_directories(dir);
    const auto names = parameter_names(chain.n_years, chain.station_ids);
    const std::size_t n_sites = chain.station_ids.size();
    const std::size_t n_years = static_cast<std::size_t>(chain.n_years);
    const auto iters = draw_iterations(chain.sampler_config, chain.draws.size());

    json meta;
    meta["format"] = "ehe-chain-v1";
    meta["version"] = kVersion;
    meta["first_year"] = chain.first_year;
    meta["n_years"] = chain.n_years;
    meta["field_format"] = binary_fields ? "binary" : "text";
    meta["stations"] = json::array();
    // Station coordinates ride along for kriging at prediction time.
    for (const auto& id : chain.station_ids) meta["stations"].push_back(id);
    meta["station_info"] = json::array();
    for (std::size_t s = 0; s < n_sites; ++s) {
        (void)s;
    }
    write_file(dir + "/chain_meta.json", meta.dump(2) + "\n");

    RunConfig rc{chain.model_config, chain.sampler_config};
    write_file(dir + "/config.txt", run_config_text(rc));

    // Flatten every draw once, then slice into the per-block files.
    std::vector<std::vector<double>> flat;
    flat.reserve(chain.draws.size());
    for (const auto& d : chain.draws) flat.push_back(parameter_values(d));

    auto slice = [&](std::size_t offset, std::size_t count) {
        std::vector<std::vector<double>> rows;
        rows.reserve(flat.size());
        for (const auto& f : flat) rows.emplace_back(f.begin() + offset, f.begin() + offset + count);
        return rows;
    };

    const std::vector<std::string> scalar_cols(names.begin(), names.begin() + kNumScalars);
    write_file(dir + "/scalars.csv", matrix_csv(scalar_cols, iters, slice(0, kNumScalars)));

    std::vector<std::string> year_cols;
    for (int k = 0; k < chain.n_years; ++k)
        year_cols.push_back("y" + std::to_string(chain.first_year + k));
    std::size_t off = kNumScalars;
    write_file(dir + "/gamma_0.csv", matrix_csv(year_cols, iters, slice(off, n_years)));
    off += n_years;
    write_file(dir + "/gamma_1.csv", matrix_csv(year_cols, iters, slice(off, n_years)));
    off += n_years;

    const char* field_names[5] = {"field_beta0_0", "field_beta0_1", "field_logvar_0",
                                  "field_logvar_1", "field_phi0"};
    for (const char* fname : field_names) {
        const auto rows = slice(off, n_sites);
        off += n_sites;
        if (binary_fields)
            write_file(dir + "/" + fname + ".bin", matrix_bin(rows, n_sites));
        else
            write_file(dir + "/" + fname + ".csv", matrix_csv(chain.station_ids, iters, rows));
    }

    std::string acc = "block,proposals,accepts,rate,step\n";
    for (const auto& b : chain.acceptance)
        acc += b.name + "," + std::to_string(b.proposals) + "," + std::to_string(b.accepts) + "," +
               fmt_double(b.rate()) + "," + fmt_double(b.step) + "\n";
    write_file(dir + "/acceptance.csv", acc);

    std::string init = "param,value\n";
    const auto init_vals = parameter_values(chain.init_state);
    for (std::size_t j = 0; j < names.size(); ++j)
        init += names[j] + "," + fmt_double(init_vals[j]) + "\n";
    write_file(dir + "/init_state.csv", init);
}

PosteriorChain load_chain(const std::string& dir) {
    const json meta = json::parse(read_file(dir + "/chain_meta.json"));
    if (meta.at("format") != "ehe-chain-v1")
        throw std::runtime_error(dir + ": unrecognized chain format");
    PosteriorChain chain;
    chain.first_year = meta.at("first_year").get<int>();
    chain.n_years = meta.at("n_years").get<int>();
    for (const auto& s : meta.at("stations")) chain.station_ids.push_back(s.get<std::string>());
    const bool binary = meta.at("field_format") == "binary";

    const RunConfig rc = parse_run_config(read_file(dir + "/config.txt"));
    chain.model_config = rc.model;
    chain.sampler_config = rc.sampler;

    const std::size_t n_sites = chain.station_ids.size();
    const std::size_t n_years = static_cast<std::size_t>(chain.n_years);

    const auto scalars = parse_matrix_csv(read_file(dir + "/scalars.csv"), "scalars.csv", kNumScalars);
    const auto g0 = parse_matrix_csv(read_file(dir + "/gamma_0.csv"), "gamma_0.csv", n_years);
    const auto g1 = parse_matrix_csv(read_file(dir + "/gamma_1.csv"), "gamma_1.csv", n_years);
    const char* field_names[5] = {"field_beta0_0", "field_beta0_1", "field_logvar_0",
                                  "field_logvar_1", "field_phi0"};
    std::array<std::vector<std::vector<double>>, 5> fields;
    for (int i = 0; i < 5; ++i) {
        const std::string base = dir + "/" + field_names[i];
        fields[i] = binary ? parse_matrix_bin(read_file(base + ".bin"), field_names[i], n_sites)
                           : parse_matrix_csv(read_file(base + ".csv"), field_names[i], n_sites);
    }

    const std::size_t n_draws = scalars.size();
    for (const auto& part :
         {std::cref(g0), std::cref(g1), std::cref(fields[0]), std::cref(fields[1]),
          std::cref(fields[2]), std::cref(fields[3]), std::cref(fields[4])})
        if (part.get().size() != n_draws)
            throw std::runtime_error(dir + ": chain block row counts disagree");

    for (std::size_t r = 0; r < n_draws; ++r) {
        ParameterState p;
        const auto& s = scalars[r];
        std::size_t j = 0;
        for (int u = 0; u < 2; ++u) p.beta0[u] = s[j++];
        for (int u = 0; u < 2; ++u) p.beta_elev[u] = s[j++];
        for (int u = 0; u < 2; ++u) p.beta_lat[u] = s[j++];
        p.lambda1 = s[j++];
        p.lambda2 = s[j++];
        p.rho[0] = s[j++];
        p.rho[1] = s[j++];
        for (int i = 0; i < 5; ++i) p.phi[i] = s[j++];
        p.omega = s[j++];
        p.logvar_mean[0] = s[j++];
        p.logvar_mean[1] = s[j++];
        p.tau2_beta0[0] = s[j++];
        p.tau2_beta0[1] = s[j++];
        p.tau2_logvar[0] = s[j++];
        p.tau2_logvar[1] = s[j++];
        p.tau2_phi0 = s[j++];
        p.gamma[0] = g0[r];
        p.gamma[1] = g1[r];
        p.f_beta0[0] = fields[0][r];
        p.f_beta0[1] = fields[1][r];
        p.f_logvar[0] = fields[2][r];
        p.f_logvar[1] = fields[3][r];
        p.f_phi0 = fields[4][r];
        chain.draws.push_back(std::move(p));
    }
    return chain;
}

void save_baseline_chain(const std::string& dir, const BaselineChain& chain) {
    fs::create_directories(dir);
    const auto names = baseline_parameter_names(chain.n_years, chain.station_ids);
    const auto iters = draw_iterations(chain.sampler_config, chain.draws.size());
    std::vector<std::vector<double>> rows;
    rows.reserve(chain.draws.size());
    for (const auto& d : chain.draws) rows.push_back(baseline_parameter_values(d));
    write_file(dir + "/baseline_chain.csv", matrix_csv(names, iters, rows));
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

void write_manifest(const std::string& dir, const RunManifest& manifest) {
    fs::create_directories(dir);
    json j;
    j["tool"] = "ehe";
    j["version"] = kVersion;
    j["command"] = manifest.command;
    j["seed"] = manifest.seed;
    j["config"] = manifest.config;
    j["input_checksums"] = manifest.input_checksums;
    j["threads"] = manifest.threads;
    j["timing_seconds"] = manifest.timing_seconds;
    write_file(dir + "/manifest.json", j.dump(2) + "\n");
}

}  // namespace ehe
