// mmlimit: construct, verify, and diagnose approximations and limits of
// finite pointed metric measure spaces.
//
// Exit codes: 0 pass/success, 1 certified fail, 2 inconclusive, 3 usage or
// I/O error. Reports are JSON lines; every run starts with a config record
// carrying the seed and input hashes so identical invocations are
// byte-identical.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mmlimit/convergence.hpp"
#include "mmlimit/gallery.hpp"
#include "mmlimit/io.hpp"

namespace {

using nlohmann::json;
using namespace mmlimit;

struct GlobalConfig {
    std::uint64_t seed = 0;
    int depth = 3;
    int budget = 10000;
    double tol = 1e-9;
    double eps_start = 0.0;
    double eps_floor = 1e-6;
    double eps_ratio = 0.9;
    std::string out;
};

class Report {
public:
    explicit Report(std::string out_path) : out_path_(std::move(out_path)) {}

    void config(const std::string& command, const GlobalConfig& g,
                const std::vector<std::string>& inputs) {
        json inputs_j = json::object();
        for (const std::string& f : inputs) {
            std::ostringstream hex;
            hex << std::hex << file_hash(f);
            inputs_j[f] = hex.str();
        }
        lines_.push_back(json{{"event", "config"},
                              {"command", command},
                              {"seed", g.seed},
                              {"depth", g.depth},
                              {"budget", g.budget},
                              {"tol", g.tol},
                              {"eps_floor", g.eps_floor},
                              {"eps_ratio", g.eps_ratio},
                              {"inputs", inputs_j}});
    }

    void add(json line) { lines_.push_back(std::move(line)); }

    void flush() const {
        if (out_path_.empty()) {
            for (const json& l : lines_) std::cout << l.dump() << "\n";
            return;
        }
        std::ofstream out(out_path_);
        if (!out) throw std::runtime_error("cannot write " + out_path_);
        for (const json& l : lines_) out << l.dump() << "\n";
    }

private:
    std::string out_path_;
    std::vector<json> lines_;
};

std::vector<double> parse_doubles(const std::string& s, char sep = ',') {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

int verdict_exit(const std::string& verdict) {
    if (verdict.rfind("pass", 0) == 0) return 0;
    if (verdict.rfind("fail", 0) == 0) return 1;
    return 2;
}

// ---------------------------------------------------------------- validate

int cmd_validate(const GlobalConfig& g, const std::string& file) {
    Report rep(g.out);
    rep.config("validate", g, {file});
    const PointedSpace s = read_space_file(file);
    const ValidationReport vr = validate_space(s);
    for (const Violation& v : vr.violations)
        rep.add(json{{"event", "violation"},
                     {"code", v.code},
                     {"i", v.i},
                     {"j", v.j},
                     {"k", v.k},
                     {"detail", v.detail}});
    rep.add(json{{"event", "verdict"}, {"pass", vr.empty()}, {"violations", vr.violations.size()}});
    rep.flush();
    return vr.empty() ? 0 : 1;
}

// --------------------------------------------------------------------- gen

void write_space_with_note(Report& rep, const PointedSpace& s, const std::string& path) {
    write_json_file(space_to_json(s), path);
    std::ostringstream hex;
    hex << std::hex << space_hash(s);
    rep.add(json{{"event", "generated"}, {"file", path}, {"hash", hex.str()}});
}

int facts_exit(Report& rep, const std::vector<GalleryFact>& facts) {
    bool all = true;
    for (const GalleryFact& f : facts) {
        rep.add(json{{"event", "fact"}, {"description", f.description}, {"pass", f.pass}});
        all = all && f.pass;
    }
    rep.flush();
    return all ? 0 : 1;
}

int cmd_gen_simplex(const GlobalConfig& g, std::size_t i, const std::string& out_file, bool check) {
    Report rep(g.out);
    rep.config("gen simplex", g, {});
    write_space_with_note(rep, gen_uniform_simplex(i), out_file);
    if (check) return facts_exit(rep, simplex_facts(i));
    rep.flush();
    return 0;
}

int cmd_gen_grid(const GlobalConfig& g, std::size_t points, double extent, const std::string& out_file,
                 bool check) {
    Report rep(g.out);
    rep.config("gen grid", g, {});
    write_space_with_note(rep, gen_doubling_grid(points, extent), out_file);
    if (check) return facts_exit(rep, doubling_grid_facts(points, extent));
    rep.flush();
    return 0;
}

int cmd_gen_inverse(const GlobalConfig& g, std::size_t imax, std::size_t K, const std::string& outdir,
                    bool check) {
    Report rep(g.out);
    rep.config("gen inverse-example", g, {});
    const SystemOfSpaces sys = gen_inverse_example(imax, K);
    std::filesystem::create_directories(outdir);
    json manifest{{"kind", "inverse"}, {"spaces", json::array()}, {"bonds", json::array()}};
    for (std::size_t i = 0; i < sys.stages(); ++i) {
        const std::string name = "stage" + std::to_string(i + 1) + ".json";
        write_space_with_note(rep, sys.spaces[i], (std::filesystem::path(outdir) / name).string());
        manifest["spaces"].push_back(name);
    }
    for (const PointMap& b : sys.bonds) manifest["bonds"].push_back(json{{"img", b.img}});
    write_json_file(manifest, (std::filesystem::path(outdir) / "manifest.json").string());
    rep.add(json{{"event", "generated"}, {"file", outdir + "/manifest.json"}});
    if (check) return facts_exit(rep, inverse_example_facts(sys, K));
    rep.flush();
    return 0;
}

int cmd_gen_prokhorov(const GlobalConfig& g, std::size_t J, std::size_t N, const std::string& outdir,
                      bool check) {
    Report rep(g.out);
    rep.config("gen prokhorov", g, {});
    const ProkhorovSharpFixture fx = gen_prokhorov_sharp(J, N);
    std::filesystem::create_directories(outdir);
    write_space_with_note(rep, fx.host, (std::filesystem::path(outdir) / "host.json").string());
    json measures = json::array();
    for (const Measure& m : fx.measures) measures.push_back(measure_to_json(m));
    write_json_file(json{{"measures", measures}},
                    (std::filesystem::path(outdir) / "measures.json").string());
    rep.add(json{{"event", "generated"}, {"file", outdir + "/measures.json"}});
    if (check) return facts_exit(rep, prokhorov_facts(fx));
    rep.flush();
    return 0;
}

// ------------------------------------------------------------------ approx

int cmd_approx_verify(const GlobalConfig& g, const std::string& xf, const std::string& yf,
                      const std::string& wf, bool strict) {
    Report rep(g.out);
    rep.config("approx verify", g, {xf, yf, wf});
    const PointedSpace X = read_space_file(xf), Y = read_space_file(yf);
    const WeakApprox w = weak_approx_from_json(read_json_file(wf));
    const Verdict v = strict ? verify_approximation(X, Y, w.map, w.R, w.eps)
                             : verify_weak_approximation(X, Y, w);
    rep.add(json{{"event", "verdict"}, {"pass", v.pass}, {"reason", v.reason}, {"strict", strict}});
    rep.flush();
    return v.pass ? 0 : 1;
}

int cmd_approx_invert(const GlobalConfig& g, const std::string& xf, const std::string& yf,
                      const std::string& wf, bool strict, const std::string& out_file) {
    Report rep(g.out);
    rep.config("approx invert", g, {xf, yf, wf});
    const PointedSpace X = read_space_file(xf), Y = read_space_file(yf);
    const WeakApprox w = weak_approx_from_json(read_json_file(wf));
    json out_doc;
    if (strict) {
        const PointMap phi = quasi_inverse(X, Y, w.map, w.R, w.eps);
        out_doc = json{{"img", phi.img},
                       {"good", json::array()},
                       {"R", w.R - w.eps},
                       {"eps", 3.0 * w.eps}};
    } else {
        out_doc = weak_approx_to_json(rough_inverse_weak(X, Y, w));
    }
    if (!out_file.empty()) write_json_file(out_doc, out_file);
    rep.add(json{{"event", "inverse"}, {"strict", strict}, {"R", out_doc["R"]}, {"eps", out_doc["eps"]}});
    rep.flush();
    return 0;
}

int cmd_approx_search(const GlobalConfig& g, const std::string& xf, const std::string& yf, double R,
                      const std::string& out_file, const std::string& trace_file) {
    Report rep(g.out);
    rep.config("approx search", g, {xf, yf});
    const PointedSpace X = read_space_file(xf), Y = read_space_file(yf);
    SearchOptions opts;
    opts.R = R;
    opts.seed = g.seed;
    opts.budget = g.budget;
    opts.grid_start = g.eps_start;
    opts.grid_floor = g.eps_floor;
    opts.grid_ratio = g.eps_ratio;
    opts.keep_trace = !trace_file.empty();
    const SearchResult res = search_weak_approximation(X, Y, opts);
    if (!trace_file.empty()) {
        std::ofstream tf(trace_file);
        for (const SearchTraceEntry& t : res.trace)
            tf << json{{"grid_eps", t.grid_eps},
                       {"swap", {t.swap_a, t.swap_b}},
                       {"score_before", t.score_before},
                       {"score_after", t.score_after}}
                      .dump()
               << "\n";
    }
    if (!out_file.empty()) write_json_file(weak_approx_to_json(res.witness), out_file);
    rep.add(json{{"event", "search"},
                 {"passed", res.passed},
                 {"achieved_eps", res.passed ? json(res.achieved_eps) : json("inf")},
                 {"best_score", res.best_score},
                 {"good_size", res.witness.good.size()}});
    rep.flush();
    return res.passed ? 0 : 2;
}

int cmd_approx_glue(const GlobalConfig& g, const std::string& xf, const std::string& yf,
                    const std::string& wf, const std::string& out_file) {
    Report rep(g.out);
    rep.config("approx glue", g, {xf, yf, wf});
    const PointedSpace X = read_space_file(xf), Y = read_space_file(yf);
    const WeakApprox w = weak_approx_from_json(read_json_file(wf));
    const GlueResult gr = glue(X, Y, w);
    const ValidationReport vr = validate_space(gr.space);
    if (!out_file.empty()) write_json_file(space_to_json(gr.space), out_file);
    rep.add(json{{"event", "glue"},
                 {"n", gr.space.size()},
                 {"valid", vr.empty()},
                 {"embed_x_distortion", distortion(X, gr.space, gr.embed_x, IndexSet::full(X.size()))},
                 {"embed_y_distortion", distortion(Y, gr.space, gr.embed_y, IndexSet::full(Y.size()))}});
    rep.flush();
    return vr.empty() ? 0 : 1;
}

// ---------------------------------------------------------------- measures

TestFamily family_with_cache(const PointedSpace& host, int depth, const std::string& cache_dir,
                             Report& rep) {
    if (cache_dir.empty()) return build_test_family(host, depth);
    std::ostringstream name;
    name << "fam_" << std::hex << space_hash(host) << "_d" << depth << ".json";
    const std::string path = (std::filesystem::path(cache_dir) / name.str()).string();
    if (std::filesystem::exists(path)) {
        rep.add(json{{"event", "family_cache"}, {"hit", true}, {"file", path}});
        return family_from_json(read_json_file(path));
    }
    const TestFamily fam = build_test_family(host, depth);
    std::filesystem::create_directories(cache_dir);
    write_json_file(family_to_json(fam, space_hash(host)), path);
    rep.add(json{{"event", "family_cache"}, {"hit", false}, {"file", path}});
    return fam;
}

std::vector<Measure> read_measures_file(const std::string& path) {
    const json j = read_json_file(path);
    std::vector<Measure> out;
    for (const auto& m : j.at("measures")) out.push_back(measure_from_json(m));
    return out;
}

int cmd_measures_delta(const GlobalConfig& g, const std::string& hostf, const std::string& muf,
                       const std::string& nuf, const std::string& cache_dir) {
    Report rep(g.out);
    rep.config("measures delta", g, {hostf, muf, nuf});
    const PointedSpace host = read_space_file(hostf);
    const TestFamily fam = family_with_cache(host, g.depth, cache_dir, rep);
    const Measure mu = measure_from_json(read_json_file(muf));
    const Measure nu = measure_from_json(read_json_file(nuf));
    rep.add(json{{"event", "delta"},
                 {"value", delta_metric(mu, nu, fam)},
                 {"family_size", fam.size()},
                 {"truncation_bound", fam.truncation_bound()}});
    rep.flush();
    return 0;
}

int cmd_measures_cauchy(const GlobalConfig& g, const std::string& hostf, const std::string& seqf,
                        const std::string& schedule) {
    Report rep(g.out);
    rep.config("measures cauchy", g, {hostf, seqf});
    const PointedSpace host = read_space_file(hostf);
    const TestFamily fam = build_test_family(host, g.depth);
    const std::vector<Measure> seq = read_measures_file(seqf);
    const CauchyReport cr = is_asymptotically_cauchy(seq, fam, parse_doubles(schedule));
    json line{{"event", "cauchy"}, {"pass", cr.pass}};
    if (cr.pass) {
        line["tail_index"] = cr.tail_index;
    } else {
        line["failed_eps"] = cr.failed_eps;
        line["violating_pair"] = {cr.viol_i, cr.viol_j};
        line["delta"] = cr.viol_delta;
    }
    rep.add(std::move(line));
    rep.flush();
    return cr.pass ? 0 : 1;
}

int cmd_measures_tight(const GlobalConfig& g, const std::string& hostf, const std::string& seqf,
                       double eps) {
    Report rep(g.out);
    rep.config("measures tight", g, {hostf, seqf});
    const PointedSpace host = read_space_file(hostf);
    const std::vector<Measure> seq = read_measures_file(seqf);
    const TightnessResult tr = prokhorov_tightness(host, seq, eps);
    rep.add(json{{"event", "tightness"},
                 {"pass", tr.pass},
                 {"T", tr.T.items()},
                 {"centers", tr.centers},
                 {"cover_size", tr.cover_size},
                 {"residual_tail_limsup", tr.residual_tail_limsup}});
    rep.flush();
    return tr.pass ? 0 : 1;
}

int cmd_measures_lift(const GlobalConfig& g, const std::string& manifest, const std::string& out_file) {
    Report rep(g.out);
    rep.config("measures lift", g, {manifest});
    const json j = read_json_file(manifest);
    const auto resolve = [&](const std::string& f) {
        std::filesystem::path p(f);
        return p.is_absolute() ? f : (std::filesystem::path(manifest).parent_path() / p).string();
    };
    const PointedSpace limit = read_space_file(resolve(j.at("limit").get<std::string>()));
    std::vector<PointedSpace> spaces;
    for (const auto& st : j.at("stages"))
        spaces.push_back(read_space_file(resolve(st.at("space").get<std::string>())));
    std::vector<LiftStage> stages;
    std::size_t k = 0;
    for (const auto& st : j.at("stages")) {
        LiftStage stage;
        stage.space = &spaces[k++];
        stage.psi.img = st.at("img").get<std::vector<std::size_t>>();
        stage.R = st.at("R").get<double>();
        stage.eps = st.at("eps").get<double>();
        stages.push_back(std::move(stage));
    }
    std::vector<std::pair<std::size_t, double>> target;
    for (const auto& t : j.at("target"))
        target.emplace_back(t.at(0).get<std::size_t>(), t.at(1).get<double>());
    LiftReport lr;
    const std::vector<Measure> lifted = lift_measure(stages, limit, target, &lr);
    if (!out_file.empty()) {
        json out = json::array();
        for (const Measure& m : lifted) out.push_back(measure_to_json(m));
        write_json_file(json{{"measures", out}}, out_file);
    }
    rep.add(json{{"event", "lift"},
                 {"c", lr.c},
                 {"prefix_stable_from", lr.prefix_stable_from},
                 {"c_tail_nondecreasing", lr.c_tail_nondecreasing}});
    rep.flush();
    return 0;
}

// --------------------------------------------------------------------- seq

int cmd_seq_ubf(const GlobalConfig& g, const std::string& manifest, const std::string& radii) {
    Report rep(g.out);
    rep.config("seq ubf", g, {manifest});
    const std::vector<PointedSpace> seq = read_sequence_manifest(manifest);
    for (const UbfRow& row : uniform_bounded_finiteness(seq, parse_doubles(radii)))
        rep.add(json{{"event", "ubf"},
                     {"R", row.R},
                     {"per_space", row.per_space},
                     {"sup", row.sup},
                     {"tail_limsup", row.tail_limsup}});
    rep.flush();
    return 0;
}

int cmd_seq_bmttb(const GlobalConfig& g, const std::string& manifest, const std::string& params,
                  const std::string& csv) {
    Report rep(g.out);
    rep.config("seq bmttb", g, {manifest});
    const std::vector<PointedSpace> seq = read_sequence_manifest(manifest);
    std::vector<BmttbTriple> triples;
    std::stringstream ss(params);
    std::string item;
    while (std::getline(ss, item, ';')) {
        const std::vector<double> v = parse_doubles(item);
        if (v.size() != 3) throw std::invalid_argument("bmttb params: expected R,r,eps triples");
        triples.push_back({v[0], v[1], v[2]});
    }
    const std::vector<BmttbTripleReport> reports = bmttb_check(seq, triples);
    int exit_code = 0;
    std::ofstream csv_out;
    if (!csv.empty()) {
        csv_out.open(csv);
        csv_out << "triple,space,M,residual\n";
    }
    for (std::size_t t = 0; t < reports.size(); ++t) {
        const BmttbTripleReport& r = reports[t];
        json line{{"event", "bmttb"},
                  {"R", r.triple.R},
                  {"r", r.triple.r},
                  {"eps", r.triple.eps},
                  {"common_M", r.common_M},
                  {"sup_pass", r.sup_pass},
                  {"asymptotic_pass", r.asymptotic_pass},
                  {"verdict", r.verdict},
                  {"prefix_limited", r.prefix_limited},
                  {"residual_at_common_M", r.residual_at_common_M}};
        if (r.certificate_space >= 0) {
            const auto& cs = r.per_space[static_cast<std::size_t>(r.certificate_space)];
            line["certificate"] = json{{"space", r.certificate_space},
                                       {"max_ball_mass", cs.max_ball_mass},
                                       {"target_ball_mass", cs.target_ball_mass},
                                       {"M", r.common_M}};
        }
        rep.add(std::move(line));
        if (!csv.empty()) {
            for (std::size_t i = 0; i < r.per_space.size(); ++i)
                csv_out << t << "," << i << "," << r.per_space[i].M << ","
                        << r.per_space[i].residual_mass << "\n";
        }
        exit_code = std::max(exit_code, verdict_exit(r.verdict));
    }
    rep.flush();
    return exit_code;
}

int cmd_seq_wpmgh(const GlobalConfig& g, const std::string& manifest, const std::string& limitf,
                  const std::string& schedule) {
    Report rep(g.out);
    rep.config("seq wpmgh", g, {manifest, limitf});
    const std::vector<PointedSpace> seq = read_sequence_manifest(manifest);
    const PointedSpace limit = read_space_file(limitf);
    std::vector<std::pair<double, double>> sched;
    std::stringstream ss(schedule);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::vector<double> v = parse_doubles(item, ':');
        if (v.size() != 2) throw std::invalid_argument("wpmgh schedule: expected R:eps pairs");
        sched.emplace_back(v[0], v[1]);
    }
    const WpmghReport wr = wpmgh_sequence_check(seq, limit, sched, g.depth, g.tol, g.seed, g.budget);
    for (const WpmghStageRow& row : wr.stages)
        rep.add(json{
            {"event", "wpmgh_stage"},
            {"R", row.R},
            {"eps", row.eps},
            {"achieved_eps", std::isfinite(row.achieved_eps) ? json(row.achieved_eps) : json("inf")},
            {"stage_pass", row.stage_pass},
            {"delta_restricted",
             std::isfinite(row.delta_restricted) ? json(row.delta_restricted) : json("inf")}});
    rep.add(json{{"event", "verdict"}, {"pass", wr.pass}});
    rep.flush();
    return wr.pass ? 0 : 2;
}

int cmd_seq_tangent(const GlobalConfig& g, const std::string& spacef, std::size_t point,
                    const std::string& scales, const std::string& params, const std::string& csv) {
    Report rep(g.out);
    rep.config("seq tangent", g, {spacef});
    const PointedSpace s = read_space_file(spacef);
    std::vector<BmttbTriple> triples{{1.0, 0.25, 0.0}};
    if (!params.empty()) {
        const std::vector<double> v = parse_doubles(params);
        if (v.size() != 3) throw std::invalid_argument("tangent params: expected R,r,eps");
        triples = {{v[0], v[1], v[2]}};
    }
    const TangentResult tr = tangent_sequence(s, point, parse_doubles(scales), triples);
    int exit_code = 0;
    for (const BmttbTripleReport& r : tr.bmttb) {
        rep.add(json{{"event", "tangent_bmttb"},
                     {"common_M", r.common_M},
                     {"verdict", r.verdict},
                     {"sup_pass", r.sup_pass}});
        exit_code = std::max(exit_code, verdict_exit(r.verdict));
    }
    rep.add(json{{"event", "doubling"},
                 {"scales", tr.doubling.scales},
                 {"ratios", tr.doubling.ratios},
                 {"smallest_quartile_max", tr.doubling.smallest_quartile_max}});
    if (!csv.empty()) {
        std::ofstream csv_out(csv);
        csv_out << "scale,ratio\n";
        for (std::size_t k = 0; k < tr.doubling.scales.size(); ++k)
            csv_out << tr.doubling.scales[k] << "," << tr.doubling.ratios[k] << "\n";
    }
    rep.flush();
    return exit_code;
}

// ------------------------------------------------------------------- limit

int cmd_limit_direct(const GlobalConfig& g, const std::string& manifest, std::size_t stage,
                     const std::string& out_file) {
    Report rep(g.out);
    rep.config("limit direct", g, {manifest});
    const SystemOfSpaces sys = read_system_manifest(manifest);
    const DirectLimitResult res = direct_limit_stage(sys, stage, g.tol);
    if (!out_file.empty()) write_json_file(space_to_json(res.limit), out_file);
    rep.add(json{{"event", "direct_limit"},
                 {"stage", stage},
                 {"limit_size", res.limit.size()},
                 {"radii", res.report.radii},
                 {"mass_columns", res.report.mass_columns},
                 {"mass_nondecreasing", res.report.mass_nondecreasing},
                 {"existence", res.report.existence}});
    rep.flush();
    return verdict_exit(res.report.existence);
}

int cmd_limit_inverse(const GlobalConfig& g, const std::string& manifest, std::size_t stage,
                      const std::string& radii, const std::string& out_file) {
    Report rep(g.out);
    rep.config("limit inverse", g, {manifest});
    const SystemOfSpaces sys = read_system_manifest(manifest);
    const InverseLimitResult res = inverse_limit_stage(sys, stage, g.tol, parse_doubles(radii));
    if (!out_file.empty()) write_json_file(space_to_json(res.limit), out_file);
    rep.add(json{{"event", "inverse_limit"},
                 {"stage", stage},
                 {"limit_size", res.limit.size()},
                 {"radii", res.report.radii},
                 {"mass_columns", res.report.basepoint_mass_columns},
                 {"mass_nonincreasing", res.report.mass_nonincreasing},
                 {"sup_is_last_stage", res.report.sup_is_last_stage},
                 {"skipped_threads", res.report.skipped_threads},
                 {"verdict", res.report.verdict},
                 {"reason", res.report.reason}});
    rep.flush();
    return verdict_exit(res.report.verdict);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"approximations, weak convergence, and limits of finite pointed metric measure spaces"};
    app.require_subcommand(1);

    GlobalConfig g;
    app.add_option("--seed", g.seed, "RNG seed");
    app.add_option("--depth", g.depth, "test family depth");
    app.add_option("--budget", g.budget, "search swap budget");
    app.add_option("--tol", g.tol, "numeric tolerance");
    app.add_option("--eps-start", g.eps_start, "search grid start (0 = diameter/2)");
    app.add_option("--eps-floor", g.eps_floor, "search grid floor");
    app.add_option("--eps-ratio", g.eps_ratio, "search grid ratio");
    app.add_option("--out", g.out, "report file (default stdout)");

    std::vector<std::function<int()>> actions;
    auto defer = [&actions](CLI::App* sub, std::function<int()> fn) {
        sub->parse_complete_callback([&actions, fn] { actions.push_back(fn); });
    };

    {
        auto* sub = app.add_subcommand("validate", "check PointedSpace invariants");
        auto file = std::make_shared<std::string>();
        sub->add_option("file", *file)->required();
        defer(sub, [&g, file] { return cmd_validate(g, *file); });
    }
    {
        auto* gen = app.add_subcommand("gen", "deterministic fixture generators");
        gen->require_subcommand(1);
        {
            auto* sub = gen->add_subcommand("simplex");
            auto i = std::make_shared<std::size_t>(4);
            auto out = std::make_shared<std::string>();
            auto check = std::make_shared<bool>(false);
            sub->add_option("--i", *i)->required();
            sub->add_option("--space-out", *out)->required();
            sub->add_flag("--check", *check);
            defer(sub, [&g, i, out, check] { return cmd_gen_simplex(g, *i, *out, *check); });
        }
        {
            auto* sub = gen->add_subcommand("grid");
            auto pts = std::make_shared<std::size_t>(9);
            auto extent = std::make_shared<double>(1.0);
            auto out = std::make_shared<std::string>();
            auto check = std::make_shared<bool>(false);
            sub->add_option("--points", *pts)->required();
            sub->add_option("--extent", *extent);
            sub->add_option("--space-out", *out)->required();
            sub->add_flag("--check", *check);
            defer(sub,
                  [&g, pts, extent, out, check] { return cmd_gen_grid(g, *pts, *extent, *out, *check); });
        }
        {
            auto* sub = gen->add_subcommand("inverse-example");
            auto imax = std::make_shared<std::size_t>(2);
            auto K = std::make_shared<std::size_t>(3);
            auto outdir = std::make_shared<std::string>();
            auto check = std::make_shared<bool>(false);
            sub->add_option("--imax", *imax)->required();
            sub->add_option("--K", *K)->required();
            sub->add_option("--outdir", *outdir)->required();
            sub->add_flag("--check", *check);
            defer(sub,
                  [&g, imax, K, outdir, check] { return cmd_gen_inverse(g, *imax, *K, *outdir, *check); });
        }
        {
            auto* sub = gen->add_subcommand("prokhorov");
            auto J = std::make_shared<std::size_t>(4);
            auto N = std::make_shared<std::size_t>(4);
            auto outdir = std::make_shared<std::string>();
            auto check = std::make_shared<bool>(false);
            sub->add_option("--J", *J)->required();
            sub->add_option("--N", *N)->required();
            sub->add_option("--outdir", *outdir)->required();
            sub->add_flag("--check", *check);
            defer(sub, [&g, J, N, outdir, check] { return cmd_gen_prokhorov(g, *J, *N, *outdir, *check); });
        }
    }
    {
        auto* ap = app.add_subcommand("approx", "approximations and gluing");
        ap->require_subcommand(1);
        {
            auto* sub = ap->add_subcommand("verify");
            auto x = std::make_shared<std::string>(), y = std::make_shared<std::string>(),
                 w = std::make_shared<std::string>();
            auto strict = std::make_shared<bool>(false);
            sub->add_option("X", *x)->required();
            sub->add_option("Y", *y)->required();
            sub->add_option("W", *w)->required();
            sub->add_flag("--strict", *strict);
            defer(sub, [&g, x, y, w, strict] { return cmd_approx_verify(g, *x, *y, *w, *strict); });
        }
        {
            auto* sub = ap->add_subcommand("invert");
            auto x = std::make_shared<std::string>(), y = std::make_shared<std::string>(),
                 w = std::make_shared<std::string>(), out = std::make_shared<std::string>();
            auto strict = std::make_shared<bool>(false);
            sub->add_option("X", *x)->required();
            sub->add_option("Y", *y)->required();
            sub->add_option("W", *w)->required();
            sub->add_flag("--strict", *strict);
            sub->add_option("--map-out", *out);
            defer(sub,
                  [&g, x, y, w, strict, out] { return cmd_approx_invert(g, *x, *y, *w, *strict, *out); });
        }
        {
            auto* sub = ap->add_subcommand("search");
            auto x = std::make_shared<std::string>(), y = std::make_shared<std::string>(),
                 out = std::make_shared<std::string>(), trace = std::make_shared<std::string>();
            auto R = std::make_shared<double>(0.0);
            sub->add_option("X", *x)->required();
            sub->add_option("Y", *y)->required();
            sub->add_option("--R", *R)->required();
            sub->add_option("--witness-out", *out);
            sub->add_option("--trace", *trace);
            defer(sub, [&g, x, y, R, out, trace] { return cmd_approx_search(g, *x, *y, *R, *out, *trace); });
        }
        {
            auto* sub = ap->add_subcommand("glue");
            auto x = std::make_shared<std::string>(), y = std::make_shared<std::string>(),
                 w = std::make_shared<std::string>(), out = std::make_shared<std::string>();
            sub->add_option("X", *x)->required();
            sub->add_option("Y", *y)->required();
            sub->add_option("W", *w)->required();
            sub->add_option("--space-out", *out);
            defer(sub, [&g, x, y, w, out] { return cmd_approx_glue(g, *x, *y, *w, *out); });
        }
    }
    {
        auto* ms = app.add_subcommand("measures", "weak-convergence diagnostics");
        ms->require_subcommand(1);
        {
            auto* sub = ms->add_subcommand("delta");
            auto h = std::make_shared<std::string>(), mu = std::make_shared<std::string>(),
                 nu = std::make_shared<std::string>(), cache = std::make_shared<std::string>();
            sub->add_option("HOST", *h)->required();
            sub->add_option("MU", *mu)->required();
            sub->add_option("NU", *nu)->required();
            sub->add_option("--cache", *cache);
            defer(sub, [&g, h, mu, nu, cache] { return cmd_measures_delta(g, *h, *mu, *nu, *cache); });
        }
        {
            auto* sub = ms->add_subcommand("cauchy");
            auto h = std::make_shared<std::string>(), seq = std::make_shared<std::string>(),
                 sched = std::make_shared<std::string>();
            sub->add_option("HOST", *h)->required();
            sub->add_option("MEASURES", *seq)->required();
            sub->add_option("--schedule", *sched)->required();
            defer(sub, [&g, h, seq, sched] { return cmd_measures_cauchy(g, *h, *seq, *sched); });
        }
        {
            auto* sub = ms->add_subcommand("tight");
            auto h = std::make_shared<std::string>(), seq = std::make_shared<std::string>();
            auto eps = std::make_shared<double>(0.1);
            sub->add_option("HOST", *h)->required();
            sub->add_option("MEASURES", *seq)->required();
            sub->add_option("--eps", *eps)->required();
            defer(sub, [&g, h, seq, eps] { return cmd_measures_tight(g, *h, *seq, *eps); });
        }
        {
            auto* sub = ms->add_subcommand("lift");
            auto man = std::make_shared<std::string>(), out = std::make_shared<std::string>();
            sub->add_option("MANIFEST", *man)->required();
            sub->add_option("--measures-out", *out);
            defer(sub, [&g, man, out] { return cmd_measures_lift(g, *man, *out); });
        }
    }
    {
        auto* sq = app.add_subcommand("seq", "sequence-level diagnostics");
        sq->require_subcommand(1);
        {
            auto* sub = sq->add_subcommand("ubf");
            auto man = std::make_shared<std::string>(), radii = std::make_shared<std::string>();
            sub->add_option("MANIFEST", *man)->required();
            sub->add_option("--radii", *radii)->required();
            defer(sub, [&g, man, radii] { return cmd_seq_ubf(g, *man, *radii); });
        }
        {
            auto* sub = sq->add_subcommand("bmttb");
            auto man = std::make_shared<std::string>(), params = std::make_shared<std::string>(),
                 csv = std::make_shared<std::string>();
            sub->add_option("MANIFEST", *man)->required();
            sub->add_option("--params", *params)->required();
            sub->add_option("--csv", *csv);
            defer(sub, [&g, man, params, csv] { return cmd_seq_bmttb(g, *man, *params, *csv); });
        }
        {
            auto* sub = sq->add_subcommand("wpmgh");
            auto man = std::make_shared<std::string>(), lim = std::make_shared<std::string>(),
                 sched = std::make_shared<std::string>();
            sub->add_option("MANIFEST", *man)->required();
            sub->add_option("LIMIT", *lim)->required();
            sub->add_option("--schedule", *sched)->required();
            defer(sub, [&g, man, lim, sched] { return cmd_seq_wpmgh(g, *man, *lim, *sched); });
        }
        {
            auto* sub = sq->add_subcommand("tangent");
            auto sp = std::make_shared<std::string>(), scales = std::make_shared<std::string>(),
                 params = std::make_shared<std::string>(), csv = std::make_shared<std::string>();
            auto point = std::make_shared<std::size_t>(0);
            sub->add_option("SPACE", *sp)->required();
            sub->add_option("--point", *point)->required();
            sub->add_option("--scales", *scales)->required();
            sub->add_option("--params", *params);
            sub->add_option("--csv", *csv);
            defer(sub, [&g, sp, point, scales, params, csv] {
                return cmd_seq_tangent(g, *sp, *point, *scales, *params, *csv);
            });
        }
    }
    {
        auto* lm = app.add_subcommand("limit", "stage-wise direct and inverse limits");
        lm->require_subcommand(1);
        {
            auto* sub = lm->add_subcommand("direct");
            auto man = std::make_shared<std::string>(), out = std::make_shared<std::string>();
            auto stage = std::make_shared<std::size_t>(0);
            sub->add_option("MANIFEST", *man)->required();
            sub->add_option("--stage", *stage)->required();
            sub->add_option("--space-out", *out);
            defer(sub, [&g, man, stage, out] { return cmd_limit_direct(g, *man, *stage, *out); });
        }
        {
            auto* sub = lm->add_subcommand("inverse");
            auto man = std::make_shared<std::string>(), radii = std::make_shared<std::string>(),
                 out = std::make_shared<std::string>();
            auto stage = std::make_shared<std::size_t>(0);
            sub->add_option("MANIFEST", *man)->required();
            sub->add_option("--stage", *stage)->required();
            sub->add_option("--radii", *radii)->required();
            sub->add_option("--space-out", *out);
            defer(sub, [&g, man, stage, radii, out] {
                return cmd_limit_inverse(g, *man, *stage, *radii, *out);
            });
        }
    }

    // global flags may follow the subcommand (mmlimit seq wpmgh ... --tol 0.2)
    const std::function<void(CLI::App*)> allow_fallthrough = [&](CLI::App* a) {
        a->fallthrough();
        for (CLI::App* sub : a->get_subcommands({})) allow_fallthrough(sub);
    };
    allow_fallthrough(&app);

    try {
        app.parse(argc, argv);
        int code = 0;
        for (const auto& fn : actions) code = std::max(code, fn());
        return code;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
