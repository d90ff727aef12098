#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lgbandit/harness.hpp"

namespace lgb {

namespace {

std::ofstream open_out(const std::string& path)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write '" + path + "'");
    return f;
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read '" + path + "'");
    return f;
}

std::string fixed2(double x)
{
    if (!std::isfinite(x)) return format_number(x);
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

std::string quoted(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else if (c == '\n' || c == '\r') out += ' ';
        else out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
            else if (c == '"') in_quotes = false;
            else cur += c;
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

double parse_double(const std::string& s)
{
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw Error("bad number '" + s + "' in CSV");
    return v;
}

std::size_t parse_size(const std::string& s)
{
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw Error("bad integer '" + s + "' in CSV");
    return v;
}

// Reads a header plus rows, mapping columns by name.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw Error("CSV is missing column '" + name + "'");
    }
};

CsvTable read_csv(const std::string& path)
{
    std::ifstream f = open_in(path);
    CsvTable t;
    std::string line;
    if (!std::getline(f, line)) throw Error("'" + path + "' is empty");
    t.header = split_csv_line(line);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != t.header.size()) throw Error("'" + path + "': row has wrong field count");
        t.rows.push_back(std::move(fields));
    }
    return t;
}

std::string opt_number(const std::optional<double>& v)
{
    return v ? format_number(*v) : std::string();
}

}  // namespace

std::string format_number(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_rounds_csv(const std::string& path, const std::vector<RunRecord>& records)
{
    std::ofstream f = open_out(path);
    f << "t,env,run,policy,action,reward,oracle_action,inst_regret,err_norm\n";
    for (const auto& rec : records) {
        for (const auto& r : rec.rounds) {
            f << r.t << ',' << rec.env << ',' << rec.run << ',' << to_string(rec.policy) << ',' << r.action << ','
              << format_number(r.reward) << ',' << r.oracle_action << ',' << format_number(r.inst_regret) << ','
              << (std::isnan(r.err_norm) ? std::string() : format_number(r.err_norm)) << '\n';
        }
    }
}

void write_episodes_csv(const std::string& path, const std::vector<EpisodeResult>& episodes)
{
    std::ofstream f = open_out(path);
    f << "dist,env,run,policy,target,nu,status,regret,oracle_regret,normalized,error\n";
    for (const auto& e : episodes) {
        f << to_string(e.dist) << ',' << e.env << ',' << e.run << ',' << to_string(e.policy) << ','
          << to_string(e.target) << ',' << format_number(e.nu) << ',' << (e.excluded ? "excluded" : "ok") << ',';
        if (e.excluded) f << ",,,";
        else f << format_number(e.regret) << ',' << format_number(e.oracle_regret) << ',' << opt_number(e.normalized) << ',';
        f << quoted(e.error) << '\n';
    }
}

void write_summary_csv(const std::string& path, const std::vector<CellSummary>& cells)
{
    std::ofstream f = open_out(path);
    f << "dist,target,nu,policy,completed,excluded,undefined_normalization,count,median,q1,q3,iqr,"
         "whisker_low,whisker_high,mean\n";
    for (const auto& c : cells) {
        f << to_string(c.dist) << ',' << to_string(c.target) << ',' << format_number(c.nu) << ','
          << to_string(c.policy) << ',' << c.completed << ',' << c.excluded << ',' << c.undefined_normalization << ',';
        if (c.stats) {
            const auto& s = *c.stats;
            f << s.count << ',' << format_number(s.median) << ',' << format_number(s.q1) << ',' << format_number(s.q3)
              << ',' << format_number(s.iqr) << ',' << format_number(s.whisker_low) << ','
              << format_number(s.whisker_high) << ',' << format_number(s.mean) << '\n';
        } else {
            f << "0,,,,,,,\n";
        }
    }
}

void write_summary_table_csv(const std::string& path, const std::vector<CellSummary>& cells)
{
    std::vector<Distribution> dists;
    std::vector<PolicyId> policies;
    for (const auto& c : cells) {
        if (std::find(dists.begin(), dists.end(), c.dist) == dists.end()) dists.push_back(c.dist);
        if (std::find(policies.begin(), policies.end(), c.policy) == policies.end()) policies.push_back(c.policy);
    }
    std::ofstream f = open_out(path);
    f << "policy";
    for (auto d : dists) f << ',' << to_string(d);
    f << '\n';
    for (auto p : policies) {
        f << to_string(p);
        for (auto d : dists) {
            f << ',';
            auto it = std::find_if(cells.begin(), cells.end(), [&](const auto& c) { return c.dist == d && c.policy == p; });
            if (it != cells.end() && it->stats) f << fixed2(it->stats->median) << " (" << fixed2(it->stats->iqr) << ')';
            else f << "missing";
        }
        f << '\n';
    }
}

void write_metric_csv(const std::string& path, const std::vector<MetricRow>& rows)
{
    std::ofstream f = open_out(path);
    f << "dist,env,status,idea_min,idea_max,kalman_ucb_min,kalman_ucb_max,error\n";
    for (const auto& r : rows) {
        f << to_string(r.dist) << ',' << r.env << ',';
        if (!r.ok) f << "failed,,,,,";
        else if (r.idea.empty) f << "empty,,,,,";
        else f << "ok," << format_number(r.idea.min) << ',' << format_number(r.idea.max) << ','
               << format_number(r.kalman_ucb.min) << ',' << format_number(r.kalman_ucb.max) << ',';
        f << quoted(r.error) << '\n';
    }
}

void write_bounds_csv(const std::string& path, const std::vector<BoundRow>& rows)
{
    std::ofstream f = open_out(path);
    f << "dist,env,status,continuous,continuous_se,discrete,skipped_pairs,error\n";
    for (const auto& r : rows) {
        f << to_string(r.dist) << ',' << r.env << ',';
        if (!r.ok) f << "failed,,,,,";
        else f << "ok," << format_number(r.continuous.value) << ',' << format_number(r.continuous.standard_error) << ','
               << format_number(r.discrete.value) << ',' << r.discrete.skipped.size() << ',';
        f << quoted(r.error) << '\n';
    }
}

std::vector<EpisodeResult> read_episodes_csv(const std::string& path)
{
    const CsvTable t = read_csv(path);
    const std::size_t c_dist = t.column("dist"), c_env = t.column("env"), c_run = t.column("run"),
                      c_policy = t.column("policy"), c_target = t.column("target"), c_nu = t.column("nu"),
                      c_status = t.column("status"), c_regret = t.column("regret"),
                      c_oracle = t.column("oracle_regret"), c_norm = t.column("normalized"), c_error = t.column("error");
    std::vector<EpisodeResult> out;
    for (const auto& row : t.rows) {
        EpisodeResult e;
        e.dist = parse_distribution(row[c_dist]);
        e.env = parse_size(row[c_env]);
        e.run = parse_size(row[c_run]);
        e.policy = parse_policy(row[c_policy]);
        e.target = parse_perturb_target(row[c_target]);
        e.nu = parse_double(row[c_nu]);
        e.excluded = row[c_status] != "ok";
        e.error = row[c_error];
        if (!e.excluded) {
            e.regret = parse_double(row[c_regret]);
            e.oracle_regret = parse_double(row[c_oracle]);
            if (!row[c_norm].empty()) e.normalized = parse_double(row[c_norm]);
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<MetricRow> read_metric_csv(const std::string& path)
{
    const CsvTable t = read_csv(path);
    const std::size_t c_dist = t.column("dist"), c_env = t.column("env"), c_status = t.column("status"),
                      c_imin = t.column("idea_min"), c_imax = t.column("idea_max"),
                      c_kmin = t.column("kalman_ucb_min"), c_kmax = t.column("kalman_ucb_max"),
                      c_error = t.column("error");
    std::vector<MetricRow> out;
    for (const auto& row : t.rows) {
        MetricRow r;
        r.dist = parse_distribution(row[c_dist]);
        r.env = parse_size(row[c_env]);
        r.error = row[c_error];
        if (row[c_status] == "ok") {
            r.idea = {parse_double(row[c_imin]), parse_double(row[c_imax]), false};
            r.kalman_ucb = {parse_double(row[c_kmin]), parse_double(row[c_kmax]), false};
        } else if (row[c_status] == "empty") {
            r.idea.empty = r.kalman_ucb.empty = true;
        } else {
            r.ok = false;
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace lgb
