#include "mmlimit/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mmlimit {

using nlohmann::json;

nlohmann::json space_to_json(const PointedSpace& s) {
    json j;
    j["n"] = s.size();
    if (!s.labels().empty()) j["labels"] = s.labels();
    j["weight"] = s.weights();
    j["base"] = s.base();
    std::visit(
        [&](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, PointedSpace::DenseDist>) {
                std::vector<std::vector<double>> rows(s.size(), std::vector<double>(s.size()));
                for (std::size_t i = 0; i < s.size(); ++i)
                    for (std::size_t k = 0; k < s.size(); ++k) rows[i][k] = s.dist(i, k);
                j["dist"] = rows;
            } else if constexpr (std::is_same_v<T, PointedSpace::LinfBasisDist>) {
                json p;
                p["group"] = b.group;
                p["radial"] = b.radial;
                if (s.scale() != 1.0) p["scale"] = s.scale();
                j["dist"] = json{{"generator", "linf_scaled_basis"}, {"params", p}};
            } else {
                json p;
                p["coords"] = b.coord;
                if (s.scale() != 1.0) p["scale"] = s.scale();
                j["dist"] = json{{"generator", "line_grid"}, {"params", p}};
            }
        },
        s.backend());
    return j;
}

PointedSpace space_from_json(const json& j) {
    const std::size_t n = j.at("n").get<std::size_t>();
    std::vector<double> weight = j.at("weight").get<std::vector<double>>();
    const std::size_t base = j.at("base").get<std::size_t>();
    std::vector<std::string> labels;
    if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();

    const json& dj = j.at("dist");
    double scale = 1.0;
    PointedSpace::Backend backend;
    if (dj.is_array()) {
        PointedSpace::DenseDist dd;
        dd.n = n;
        dd.d.resize(n * n);
        if (dj.size() != n) throw std::invalid_argument("space json: dist row count mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = dj[i].get<std::vector<double>>();
            if (row.size() != n) throw std::invalid_argument("space json: dist column count mismatch");
            for (std::size_t k = 0; k < n; ++k) dd.d[i * n + k] = row[k];
        }
        backend = std::move(dd);
    } else {
        const std::string gen = dj.at("generator").get<std::string>();
        const json& p = dj.at("params");
        if (p.contains("scale")) scale = p.at("scale").get<double>();
        if (gen == "linf_scaled_basis") {
            PointedSpace::LinfBasisDist b;
            b.group = p.at("group").get<std::vector<std::uint32_t>>();
            b.radial = p.at("radial").get<std::vector<double>>();
            if (b.group.size() != n || b.radial.size() != n)
                throw std::invalid_argument("space json: generator params size mismatch");
            backend = std::move(b);
        } else if (gen == "line_grid") {
            PointedSpace::LineDist b;
            b.coord = p.at("coords").get<std::vector<double>>();
            if (b.coord.size() != n)
                throw std::invalid_argument("space json: generator params size mismatch");
            backend = std::move(b);
        } else {
            throw std::invalid_argument("space json: unknown dist generator '" + gen + "'");
        }
    }
    PointedSpace s(std::move(backend), std::move(weight), base, std::move(labels));
    return scale == 1.0 ? s : s.rescaled(1.0 / scale);
}

nlohmann::json measure_to_json(const Measure& m) { return json{{"weight", m.w}}; }

Measure measure_from_json(const json& j) { return Measure{j.at("weight").get<std::vector<double>>()}; }

nlohmann::json weak_approx_to_json(const WeakApprox& w) {
    return json{{"img", w.map.img}, {"good", w.good.items()}, {"R", w.R}, {"eps", w.eps}};
}

WeakApprox weak_approx_from_json(const json& j) {
    WeakApprox w;
    w.map.img = j.at("img").get<std::vector<std::size_t>>();
    w.good = IndexSet(j.at("good").get<std::vector<std::size_t>>());
    w.R = j.at("R").get<double>();
    w.eps = j.at("eps").get<double>();
    return w;
}

nlohmann::json family_to_json(const TestFamily& fam, std::uint64_t host_hash) {
    return json{{"host_hash", host_hash},
                {"host_n", fam.host_n},
                {"depth", fam.depth},
                {"fns", fam.fns},
                {"lip", fam.lip}};
}

TestFamily family_from_json(const json& j) {
    TestFamily fam;
    fam.host_n = j.at("host_n").get<std::size_t>();
    fam.depth = j.at("depth").get<int>();
    fam.fns = j.at("fns").get<std::vector<std::vector<double>>>();
    fam.lip = j.at("lip").get<std::vector<double>>();
    return fam;
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

PointedSpace read_space_file(const std::string& path) { return space_from_json(read_json_file(path)); }

namespace {

std::string resolve_relative(const std::string& manifest, const std::string& entry) {
    std::filesystem::path p(entry);
    if (p.is_absolute()) return entry;
    return (std::filesystem::path(manifest).parent_path() / p).string();
}

}  // namespace

SystemOfSpaces read_system_manifest(const std::string& path) {
    const json j = read_json_file(path);
    SystemOfSpaces sys;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "direct") {
        sys.kind = SystemOfSpaces::Kind::Direct;
    } else if (kind == "inverse") {
        sys.kind = SystemOfSpaces::Kind::Inverse;
    } else {
        throw std::invalid_argument("system manifest: kind must be 'direct' or 'inverse'");
    }
    for (const auto& f : j.at("spaces"))
        sys.spaces.push_back(read_space_file(resolve_relative(path, f.get<std::string>())));
    for (const auto& b : j.at("bonds")) {
        PointMap f;
        f.img = b.at("img").get<std::vector<std::size_t>>();
        sys.bonds.push_back(std::move(f));
    }
    return sys;
}

std::vector<PointedSpace> read_sequence_manifest(const std::string& path) {
    const json j = read_json_file(path);
    std::vector<PointedSpace> out;
    for (const auto& f : j.at("spaces"))
        out.push_back(read_space_file(resolve_relative(path, f.get<std::string>())));
    return out;
}

std::uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    return fnv1a(bytes.data(), bytes.size());
}

}  // namespace mmlimit
