#include "morsebif/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "morsebif/csv.hpp"

namespace morsebif {

namespace {

using nlohmann::json;

Mat parse_matrix(const json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string(what) + ": expected array of rows");
    const int rows = static_cast<int>(j.size());
    if (rows == 0) return Mat(0, 0);
    const int cols = static_cast<int>(j[0].size());
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[i].size()) != cols)
            throw ConfigError(std::string(what) + ": ragged rows");
        for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
    }
    return m;
}

// Subspace bases come in as a list of spanning vectors (rows); stored as
// orthonormal columns.
Mat parse_span(const json& j, int n, const char* what) {
    if (j.is_null() || (j.is_array() && j.empty())) return Mat(n, 0);
    const Mat rows = parse_matrix(j, what);
    if (rows.cols() != n) throw ConfigError(std::string(what) + ": vectors have wrong length");
    return orthonormalize_columns(rows.transpose());
}

json matrix_rows(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (int c = 0; c < m.cols(); ++c) r.push_back(m(i, c));
        rows.push_back(r);
    }
    return rows;
}

json span_rows(const Mat& cols) { return matrix_rows(cols.transpose()); }

Vec parse_vector(const json& j) {
    Vec v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
    return v;
}

json vector_json(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json config_json(const RunConfig& cfg) {
    json j;
    j["family"]["name"] = cfg.family_name;
    for (const auto& [k, v] : cfg.family_params) j["family"][k] = v;
    j["dim"] = cfg.dim;

    json b;
    b["type"] = cfg.boundary_type;
    if (const auto* p = std::get_if<ProductSubspaces>(&cfg.boundary)) {
        b["v0"] = span_rows(p->v0_basis);
        b["v1"] = span_rows(p->v1_basis);
        if (p->offset0.size()) b["offset0"] = vector_json(p->offset0);
        if (p->offset1.size()) b["offset1"] = vector_json(p->offset1);
    } else if (const auto* t = std::get_if<OrthogonalTwist>(&cfg.boundary)) {
        b["E"] = matrix_rows(t->E);
    }
    j["boundary"] = b;

    j["tau"] = cfg.tau;
    j["lambda"] = cfg.lambda;
    j["lambda_range"] = {cfg.lambda_range[0], cfg.lambda_range[1]};
    j["grid"] = cfg.grid;
    j["lambda_grid"] = cfg.lambda_grid;
    j["tol"] = cfg.tol;
    j["seed"] = cfg.seed;
    j["trials"] = cfg.trials;
    if (!cfg.out_dir.empty()) j["out"] = cfg.out_dir;
    j["svg"] = cfg.svg;
    j["refine"] = cfg.refine;
    j["branch"] = cfg.branch;
    if (cfg.guess_q.size()) j["guess_q"] = vector_json(cfg.guess_q);
    if (cfg.guess_v.size()) j["guess_v"] = vector_json(cfg.guess_v);
    return j;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    RunConfig cfg;
    try {
        if (j.contains("family")) {
            const json& f = j["family"];
            cfg.family_name = f.value("name", cfg.family_name);
            for (auto it = f.begin(); it != f.end(); ++it)
                if (it.key() != "name" && it->is_number())
                    cfg.family_params[it.key()] = it->get<double>();
        }
        cfg.dim = j.value("dim", cfg.dim);
        cfg.tau = j.value("tau", cfg.tau);
        cfg.lambda = j.value("lambda", cfg.lambda);
        if (j.contains("lambda_range")) {
            cfg.lambda_range[0] = j["lambda_range"][0].get<double>();
            cfg.lambda_range[1] = j["lambda_range"][1].get<double>();
        }
        cfg.grid = j.value("grid", cfg.grid);
        cfg.lambda_grid = j.value("lambda_grid", cfg.lambda_grid);
        cfg.tol = j.value("tol", cfg.tol);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.trials = j.value("trials", cfg.trials);
        cfg.out_dir = j.value("out", cfg.out_dir);
        cfg.svg = j.value("svg", cfg.svg);
        cfg.refine = j.value("refine", cfg.refine);
        cfg.branch = j.value("branch", cfg.branch);
        if (j.contains("guess_q")) cfg.guess_q = parse_vector(j["guess_q"]);
        if (j.contains("guess_v")) cfg.guess_v = parse_vector(j["guess_v"]);

        if (j.contains("boundary")) {
            const json& b = j["boundary"];
            cfg.boundary_type = b.value("type", "twist");
            if (cfg.boundary_type == "product") {
                ProductSubspaces p;
                p.v0_basis = parse_span(b.contains("v0") ? b["v0"] : json(), cfg.dim, "v0");
                p.v1_basis = parse_span(b.contains("v1") ? b["v1"] : json(), cfg.dim, "v1");
                if (b.contains("offset0")) p.offset0 = parse_vector(b["offset0"]);
                if (b.contains("offset1")) p.offset1 = parse_vector(b["offset1"]);
                cfg.boundary = std::move(p);
            } else if (cfg.boundary_type == "twist") {
                OrthogonalTwist t;
                t.E = b.contains("E") ? parse_matrix(b["E"], "E")
                                      : Mat::Identity(cfg.dim, cfg.dim);
                cfg.boundary = std::move(t);
            } else if (cfg.boundary_type == "brake") {
                cfg.boundary = EvenPeriodic{};
            } else {
                throw ConfigError("boundary.type must be product | twist | brake");
            }
        } else {
            cfg.boundary = OrthogonalTwist{Mat::Identity(cfg.dim, cfg.dim)};
            cfg.boundary_type = "twist";
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }

    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be > 0");
    if (cfg.grid < 32) throw ConfigError("grid must be >= 32");
    if (cfg.lambda_grid < 2) throw ConfigError("lambda_grid must be >= 2");
    if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
    if (!(cfg.tau > 0.0)) throw ConfigError("tau must be > 0");
    if (cfg.dim < 1) throw ConfigError("dim must be >= 1");
    try {
        validate_boundary(cfg.boundary, cfg.dim);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("boundary: ") + e.what());
    }

    cfg.canonical = config_json(cfg).dump();
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config(buf.str());
}

std::string canonical_text(const RunConfig& cfg) { return config_json(cfg).dump(2); }

LagrangianFamily make_family(const RunConfig& cfg) {
    auto param = [&](const char* key, double dflt) {
        const auto it = cfg.family_params.find(key);
        return it == cfg.family_params.end() ? dflt : it->second;
    };
    if (cfg.family_name == "pendulum") {
        if (cfg.dim != 1) throw ConfigError("pendulum family has dim 1");
        return build_pendulum(param("l", 1.0), param("g", 1.0));
    }
    if (cfg.family_name == "free") return build_free_particle(cfg.dim);
    if (cfg.family_name == "harmonic")
        return build_harmonic(param("omega0", 1.0), param("slope", 0.0), cfg.dim);
    throw ConfigError("unknown family: " + cfg.family_name +
                      " (built-ins: pendulum, free, harmonic)");
}

}  // namespace morsebif
