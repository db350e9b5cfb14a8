// Command-line front end: run the algorithms over instance files, emit
// results plus optional metering reports, generate instances, and run
// benchmark sweeps.
//
// Input formats:
//   CSV     one record per line: a value, "x,y", "a,b,beta", or "a,b,c,beta"
//   binary  magic "ROPS", version u16, arity u16, count u64, then count*arity
//           little-endian 8-byte reals
//
// Exit codes: 0 success, 1 oracle mismatch or infeasible LP input, 2 usage or
// file-format errors.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rops/hull_blocks.hpp"
#include "rops/hull_sorted.hpp"
#include "rops/lp2d.hpp"
#include "rops/lp3d.hpp"
#include "rops/selection.hpp"
#include "rops/testkit.hpp"
#include "rops/workspace.hpp"

using json = nlohmann::json;
using namespace rops;

namespace {

using Clock = std::chrono::steady_clock;

// ---- instance files ---------------------------------------------------------

constexpr char kMagic[4] = {'R', 'O', 'P', 'S'};
constexpr std::uint16_t kVersion = 1;

// Raw records of a fixed arity; the typed views below alias this storage.
struct Records {
    std::size_t arity = 0;
    std::vector<double> data;
    std::size_t count() const { return arity ? data.size() / arity : 0; }
};

Records load_binary(const std::string& path, std::ifstream& in) {
    char magic[4];
    std::uint16_t ver = 0, arity = 0;
    std::uint64_t count = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&ver), 2);
    in.read(reinterpret_cast<char*>(&arity), 2);
    in.read(reinterpret_cast<char*>(&count), 8);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError(path + ": bad binary header");
    if (ver != kVersion)
        throw FormatError(path + ": unsupported version " + std::to_string(ver));
    if (arity < 1 || arity > 4)
        throw FormatError(path + ": arity " + std::to_string(arity) + " out of range");
    Records r;
    r.arity = arity;
    r.data.resize(count * arity);
    in.read(reinterpret_cast<char*>(r.data.data()),
            static_cast<std::streamsize>(r.data.size() * sizeof(double)));
    if (!in) throw FormatError(path + ": truncated binary payload");
    return r;
}

Records load_records(const std::string& path, std::size_t want_arity) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path + ": cannot open");
    char magic[4] = {};
    in.read(magic, 4);
    in.seekg(0);
    Records r;
    if (in.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0) {
        r = load_binary(path, in);
    } else {
        in.clear();
        r.arity = want_arity;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            std::string field;
            std::size_t got = 0;
            while (std::getline(ls, field, ',')) {
                ++got;
                std::size_t pos = 0;
                double v = 0;
                try {
                    v = std::stod(field, &pos);
                } catch (const std::exception&) {
                    pos = 0;
                }
                if (pos == 0)
                    throw FormatError(path + ":" + std::to_string(lineno) + ": bad number '" +
                                      field + "'");
                r.data.push_back(v);
            }
            if (got != want_arity)
                throw FormatError(path + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(want_arity) + " fields, got " +
                                  std::to_string(got));
        }
    }
    if (r.arity != want_arity)
        throw FormatError(path + ": arity " + std::to_string(r.arity) + ", expected " +
                          std::to_string(want_arity));
    return r;
}

void write_binary(const std::string& path, std::size_t arity, const std::vector<double>& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path + ": cannot open for writing");
    auto a16 = static_cast<std::uint16_t>(arity);
    auto count = static_cast<std::uint64_t>(data.size() / arity);
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&kVersion), 2);
    out.write(reinterpret_cast<const char*>(&a16), 2);
    out.write(reinterpret_cast<const char*>(&count), 8);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
}

void write_csv(const std::string& path, std::size_t arity, const std::vector<double>& data) {
    std::ofstream out(path);
    if (!out) throw FormatError(path + ": cannot open for writing");
    char buf[32];
    for (std::size_t i = 0; i < data.size(); i += arity) {
        for (std::size_t j = 0; j < arity; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", data[i + j]);
            out << (j ? "," : "") << buf;
        }
        out << '\n';
    }
}

// ---- reporting --------------------------------------------------------------

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct RunReport {
    std::string algorithm;
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t peak_words = 0;
    std::uint64_t input_reads = 0;
    double wall_time_ms = 0;
    std::string digest;

    json to_json() const {
        return {{"algorithm", algorithm},    {"n", n},
                {"k", k},                    {"peak_words", peak_words},
                {"input_reads", input_reads}, {"wall_time_ms", wall_time_ms},
                {"digest", digest}};
    }
    std::string csv_row() const {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%zu,%llu,%.3f,%s", algorithm.c_str(), n, k,
                      peak_words, (unsigned long long)input_reads, wall_time_ms, digest.c_str());
        return buf;
    }
};

std::string digest_of(const std::string& payload) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)fnv1a(payload));
    return buf;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw FormatError(out_path + ": cannot open for writing");
    out << text;
}

const char* verdict_name(LpVerdict v) {
    switch (v) {
        case LpVerdict::Optimal: return "optimal";
        case LpVerdict::Infeasible: return "infeasible";
        case LpVerdict::Unbounded: return "unbounded";
    }
    return "?";
}

std::string format_points(const std::vector<Point>& pts) {
    std::string s;
    char buf[80];
    for (const Point& p : pts) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x, p.y);
        s += buf;
    }
    return s;
}

std::size_t resolve_k(std::size_t n, std::optional<std::size_t> k, std::optional<double> eps) {
    if (k) return *k;
    if (eps) {
        if (*eps <= 0 || *eps > 1) throw FormatError("--epsilon must be in (0, 1]");
        // epsilon = 1/(k+1)
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / *eps)) - 1);
    }
    return choose_k(std::max<std::size_t>(n, 1));
}

// ---- per-algorithm runs -------------------------------------------------------

struct RunOut {
    std::string text;    // data output
    RunReport report;
    int exit_code = 0;
    std::string err;
};

RunOut run_select(const Records& rec, std::size_t rank, std::size_t k, bool oracle_check) {
    RunOut out;
    ReadOnlyView<double> view(rec.data.data(), rec.count());
    if (rank == 0 || rank > view.size()) throw FormatError("--r out of range");
    ScalarViewSequence seq(view);
    WorkspaceMeter meter;
    auto t0 = Clock::now();
    Keyed r = select_ak(seq, rank, SelectConfig{k}, meter);
    out.report = {"select", view.size(), k, meter.peak_words(), view.reads(),
                  std::chrono::duration<double, std::milli>(Clock::now() - t0).count(), ""};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g\n", r.value);
    out.text = buf;
    out.report.digest = digest_of(out.text);
    if (oracle_check && r.value != testkit::oracle_select(rec.data, rank)) {
        out.err = "select: result differs from sort-copy reference";
        out.exit_code = 1;
    }
    return out;
}

RunOut run_hull(const Records& rec, bool sorted, std::size_t k, bool oracle_check) {
    RunOut out;
    std::vector<Point> pts(rec.count());
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {rec.data[2 * i], rec.data[2 * i + 1]};
    ReadOnlyView<Point> view(pts.data(), pts.size());
    WorkspaceMeter meter;
    std::vector<Point> hull;
    auto t0 = Clock::now();
    if (sorted) {
        HullConfig cfg;
        cfg.select_k = k;
        cfg.validate_sorted = true;
        convex_hull(view, [&](Point p) { hull.push_back(p); }, meter, cfg);
    } else {
        HullBlocksConfig cfg;
        cfg.select_k = k;
        hull_unsorted(view, [&](Point p) { hull.push_back(p); }, meter, cfg);
    }
    out.report = {sorted ? "hull-sorted" : "hull-unsorted", pts.size(), k, meter.peak_words(),
                  view.reads(),
                  std::chrono::duration<double, std::milli>(Clock::now() - t0).count(), ""};
    out.text = format_points(hull);
    out.report.digest = digest_of(out.text);
    if (oracle_check && hull != testkit::oracle_hull(pts)) {
        out.err = "hull: result differs from reference hull";
        out.exit_code = 1;
    }
    return out;
}

bool lp_status_matches(LpVerdict got, testkit::LpStatus want) {
    return (got == LpVerdict::Optimal && want == testkit::LpStatus::Optimal) ||
           (got == LpVerdict::Unbounded && want == testkit::LpStatus::Unbounded) ||
           (got == LpVerdict::Infeasible && want == testkit::LpStatus::Infeasible);
}

RunOut run_lp2(const Records& rec, double c1, double c2, std::size_t k, bool oracle_check) {
    RunOut out;
    std::vector<Constraint2> rows(rec.count());
    for (std::size_t i = 0; i < rows.size(); ++i)
        rows[i] = {rec.data[3 * i], rec.data[3 * i + 1], rec.data[3 * i + 2]};
    ReadOnlyView<Constraint2> view(rows.data(), rows.size());
    WorkspaceMeter meter;
    auto t0 = Clock::now();
    Lp2Result r = solve_lp2(view, c1, c2, meter, Lp2Config{k});
    out.report = {"lp2", rows.size(), k, meter.peak_words(), view.reads(),
                  std::chrono::duration<double, std::milli>(Clock::now() - t0).count(), ""};
    json j = {{"status", verdict_name(r.status)}};
    if (r.status != LpVerdict::Infeasible) {
        j["x"] = {r.x1, r.x2};
        if (r.status == LpVerdict::Optimal) j["value"] = r.value;
    }
    out.text = j.dump() + "\n";
    out.report.digest = digest_of(out.text);
    if (r.status == LpVerdict::Infeasible) out.exit_code = 1;
    if (oracle_check) {
        auto orc = testkit::oracle_lp2(rows, c1, c2);
        bool ok = lp_status_matches(r.status, orc.status) &&
                  (orc.status != testkit::LpStatus::Optimal ||
                   std::fabs(r.value - orc.value) <= 1e-9 * (1 + std::fabs(orc.value)));
        if (c1 == 0 && c2 == 0)
            ok = (r.status == LpVerdict::Optimal) == (orc.status != testkit::LpStatus::Infeasible);
        if (!ok) {
            out.err = "lp2: result differs from enumeration reference";
            out.exit_code = 1;
        }
    }
    return out;
}

RunOut run_lp3(const Records& rec, double d1, double d2, double d3, std::size_t k,
               bool oracle_check) {
    RunOut out;
    std::vector<Constraint3> rows(rec.count());
    for (std::size_t i = 0; i < rows.size(); ++i)
        rows[i] = {rec.data[4 * i], rec.data[4 * i + 1], rec.data[4 * i + 2], rec.data[4 * i + 3]};
    ReadOnlyView<Constraint3> view(rows.data(), rows.size());
    WorkspaceMeter meter;
    auto t0 = Clock::now();
    Lp3Result r = solve_lp3(view, d1, d2, d3, meter, Lp3Config{k});
    out.report = {"lp3", rows.size(), k, meter.peak_words(), view.reads(),
                  std::chrono::duration<double, std::milli>(Clock::now() - t0).count(), ""};
    json j = {{"status", verdict_name(r.status)}};
    if (r.status != LpVerdict::Infeasible) {
        j["x"] = {r.x1, r.x2, r.x3};
        if (r.status == LpVerdict::Optimal) j["value"] = r.value;
    }
    out.text = j.dump() + "\n";
    out.report.digest = digest_of(out.text);
    if (r.status == LpVerdict::Infeasible) out.exit_code = 1;
    if (oracle_check) {
        auto orc = testkit::oracle_lp3(rows, d1, d2, d3);
        bool ok = lp_status_matches(r.status, orc.status) &&
                  (orc.status != testkit::LpStatus::Optimal ||
                   std::fabs(r.value - orc.value) <= 1e-8 * (1 + std::fabs(orc.value)));
        if (d1 == 0 && d2 == 0 && d3 == 0)
            ok = (r.status == LpVerdict::Optimal) == (orc.status != testkit::LpStatus::Infeasible);
        if (!ok) {
            out.err = "lp3: result differs from enumeration reference";
            out.exit_code = 1;
        }
    }
    return out;
}

// ---- gen & bench --------------------------------------------------------------

std::vector<double> gen_instance(const std::string& kind, std::uint64_t seed, std::size_t n,
                                 bool sorted, std::size_t& arity) {
    testkit::Rng rng(seed);
    std::vector<double> data;
    if (kind == "values") {
        arity = 1;
        return testkit::gen_values(rng, n, 0.1);
    }
    if (kind == "points") {
        arity = 2;
        testkit::PointGenOptions po;
        po.sorted_by_x = sorted;
        po.dup_x_fraction = 0.1;
        for (const Point& p : testkit::gen_points(rng, n, po)) {
            data.push_back(p.x);
            data.push_back(p.y);
        }
        return data;
    }
    if (kind == "lp2") {
        arity = 3;
        testkit::LpGenOptions o;
        o.ensure_feasible = true;
        for (const Constraint2& c : testkit::gen_lp2(rng, n, o)) {
            data.push_back(c.a);
            data.push_back(c.b);
            data.push_back(c.beta);
        }
        return data;
    }
    if (kind == "lp3") {
        arity = 4;
        testkit::LpGenOptions o;
        o.ensure_feasible = true;
        for (const Constraint3& c : testkit::gen_lp3(rng, n, o)) {
            data.push_back(c.a);
            data.push_back(c.b);
            data.push_back(c.c);
            data.push_back(c.beta);
        }
        return data;
    }
    throw FormatError("unknown --kind '" + kind + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"space-bounded prune-and-search algorithms over read-only inputs"};
    app.require_subcommand(1);

    std::string file, out_path, kind = "points", format = "csv", algo = "hull-sorted";
    std::optional<std::size_t> k_opt;
    std::optional<double> eps_opt;
    bool meter = false, oracle_check = false, sorted = false, unsorted = false;
    std::size_t rank = 1, gen_n = 1024, n0 = 1024, n1 = 65536;
    std::uint64_t seed = 1;
    double c1 = 0, c2 = 1, d1 = 0, d2 = 0, d3 = 1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_path, "write data output to FILE instead of stdout");
        cmd->add_option("--k", k_opt, "selection level override");
        cmd->add_option("--epsilon", eps_opt, "space/read tradeoff; k = 1/epsilon - 1");
        cmd->add_flag("--meter", meter, "print a run-report JSON to stdout");
        cmd->add_flag("--oracle-check", oracle_check, "compare against the reference oracle");
    };

    CLI::App* sel = app.add_subcommand("select", "t-th smallest of a value file");
    sel->add_option("file", file, "values file")->required();
    sel->add_option("--r", rank, "1-based rank")->required();
    add_common(sel);

    CLI::App* hull = app.add_subcommand("hull", "convex hull of a point file");
    hull->add_option("file", file, "points file")->required();
    hull->add_flag("--sorted", sorted, "input is x-sorted; use the log-space variant");
    hull->add_flag("--unsorted", unsorted, "use the sqrt(n)-space block variant (default)");
    add_common(hull);

    CLI::App* lp2 = app.add_subcommand("lp2", "minimize c1*x1 + c2*x2 subject to a row file");
    lp2->add_option("file", file, "constraint rows a,b,beta")->required();
    lp2->add_option("--c1", c1, "objective coefficient")->required();
    lp2->add_option("--c2", c2, "objective coefficient")->required();
    add_common(lp2);

    CLI::App* lp3 = app.add_subcommand("lp3", "minimize d.x subject to a row file");
    lp3->add_option("file", file, "constraint rows a,b,c,beta")->required();
    lp3->add_option("--d1", d1, "objective coefficient")->required();
    lp3->add_option("--d2", d2, "objective coefficient")->required();
    lp3->add_option("--d3", d3, "objective coefficient")->required();
    add_common(lp3);

    CLI::App* gen = app.add_subcommand("gen", "generate an instance file");
    gen->add_option("--kind", kind, "values|points|lp2|lp3");
    gen->add_option("--n", gen_n, "instance size");
    gen->add_option("--seed", seed, "generator seed");
    gen->add_flag("--sorted", sorted, "points only: sort by x");
    gen->add_option("--format", format, "csv|bin");
    gen->add_option("--out", out_path, "output file")->required();

    CLI::App* bench = app.add_subcommand("bench", "n-doubling sweep; RunReport CSV to stdout");
    bench->add_option("--algo", algo, "select|hull-sorted|hull-unsorted|lp2|lp3");
    bench->add_option("--n0", n0, "first size");
    bench->add_option("--n1", n1, "last size (inclusive, doubling)");
    bench->add_option("--seed", seed, "generator seed");
    bench->add_option("--k", k_opt, "selection level override");

    CLI11_PARSE(app, argc, argv);

    try {
        RunOut r;
        if (sel->parsed()) {
            Records rec = load_records(file, 1);
            r = run_select(rec, rank, resolve_k(rec.count(), k_opt, eps_opt), oracle_check);
        } else if (hull->parsed()) {
            if (sorted && unsorted) throw FormatError("--sorted and --unsorted are exclusive");
            Records rec = load_records(file, 2);
            std::size_t k = k_opt || eps_opt ? resolve_k(rec.count(), k_opt, eps_opt) : 2;
            r = run_hull(rec, sorted, k, oracle_check);
        } else if (lp2->parsed()) {
            Records rec = load_records(file, 3);
            r = run_lp2(rec, c1, c2, resolve_k(rec.count(), k_opt, eps_opt), oracle_check);
        } else if (lp3->parsed()) {
            Records rec = load_records(file, 4);
            r = run_lp3(rec, d1, d2, d3, resolve_k(rec.count(), k_opt, eps_opt), oracle_check);
        } else if (gen->parsed()) {
            std::size_t arity = 0;
            auto data = gen_instance(kind, seed, gen_n, sorted, arity);
            if (format == "bin") write_binary(out_path, arity, data);
            else if (format == "csv") write_csv(out_path, arity, data);
            else throw FormatError("unknown --format '" + format + "'");
            return 0;
        } else if (bench->parsed()) {
            std::cout << "algorithm,n,k,peak_words,input_reads,wall_time_ms,digest\n";
            for (std::size_t n = n0; n <= n1; n *= 2) {
                std::size_t arity = 0;
                std::string kind2 = algo == "select" ? "values"
                                    : algo == "lp2"  ? "lp2"
                                    : algo == "lp3"  ? "lp3"
                                                     : "points";
                Records rec;
                rec.data = gen_instance(kind2, seed + n, n, algo == "hull-sorted", arity);
                rec.arity = arity;
                std::size_t k = resolve_k(n, k_opt, eps_opt);
                RunOut row;
                if (algo == "select") row = run_select(rec, (n + 1) / 2, k, false);
                else if (algo == "hull-sorted") row = run_hull(rec, true, k, false);
                else if (algo == "hull-unsorted") row = run_hull(rec, false, k, false);
                else if (algo == "lp2") row = run_lp2(rec, 3, 2, k, false);
                else if (algo == "lp3") row = run_lp3(rec, 1, 1, 1, k, false);
                else throw FormatError("unknown --algo '" + algo + "'");
                std::cout << row.report.csv_row() << "\n";
            }
            return 0;
        }
        emit(r.text, out_path);
        if (meter) std::cout << r.report.to_json().dump() << "\n";
        if (!r.err.empty()) std::cerr << r.err << "\n";
        return r.exit_code;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
