#include "lgbandit/environment.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lgb {

namespace {

constexpr std::array<std::pair<Distribution, std::string_view>, 5> kDistNames{{
    {Distribution::gaussian, "gaussian"},
    {Distribution::uniform, "uniform"},
    {Distribution::exponential, "exponential"},
    {Distribution::cauchy, "cauchy"},
    {Distribution::bernoulli, "bernoulli"},
}};

double draw(Distribution dist, RandomStream& rng)
{
    switch (dist) {
    case Distribution::gaussian:
        return rng.normal();
    case Distribution::uniform:
        return rng.uniform();
    case Distribution::exponential:
        return -std::log(rng.uniform());
    case Distribution::cauchy: {
        const double x = rng.normal();
        const double y = rng.normal();
        return x / y;
    }
    case Distribution::bernoulli:
        return rng.uniform() < 0.5 ? 1.0 : 0.0;
    }
    return 0.0;
}

Matrix draw_matrix(Distribution dist, Eigen::Index rows, Eigen::Index cols, RandomStream& rng)
{
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = draw(dist, rng);
    return m;
}

}  // namespace

std::string_view to_string(Distribution dist)
{
    for (const auto& [d, name] : kDistNames)
        if (d == dist) return name;
    return "unknown";
}

Distribution parse_distribution(std::string_view name)
{
    for (const auto& [d, n] : kDistNames)
        if (n == name) return d;
    throw ParameterError("unknown distribution '" + std::string(name) + "'");
}

const std::vector<Distribution>& all_distributions()
{
    static const std::vector<Distribution> all{Distribution::gaussian, Distribution::cauchy,
                                               Distribution::uniform, Distribution::bernoulli,
                                               Distribution::exponential};
    return all;
}

LgdsSpec generate_spec(Distribution dist, Eigen::Index d, Eigen::Index k, double rho_target,
                       std::uint64_t seed)
{
    if (d < 1 || k < 1) throw ParameterError("generate_spec: d and k must be at least 1");
    if (!(rho_target > 0.0)) throw ParameterError("generate_spec: rho_target must be positive");

    RandomStream rng(seed);

    Matrix t;
    double rho = 0.0;
    for (int attempt = 0; attempt < 100 && !(rho > 0.0 && std::isfinite(rho)); ++attempt) {
        t = draw_matrix(dist, d, d, rng);
        rho = spectral_radius(t);
    }
    if (!(rho > 0.0 && std::isfinite(rho))) {
        throw ParameterError("generate_spec: could not draw a state matrix with nonzero spectral radius");
    }

    const Matrix r = draw_matrix(dist, d, d, rng);
    double sigma = 0.0;
    while (sigma == 0.0 || !std::isfinite(sigma)) sigma = std::abs(draw(dist, rng));

    Matrix actions(k, d);
    for (Eigen::Index i = 0; i < k; ++i) {
        Vector raw;
        double norm = 0.0;
        while (!(norm > 0.0 && std::isfinite(norm))) {
            raw = draw_matrix(dist, d, 1, rng);
            norm = raw.norm();
        }
        actions.row(i) = (raw / norm).transpose();
    }

    LgdsSpec spec;
    spec.gamma = (rho_target / rho) * t;
    spec.actions = std::move(actions);
    spec.q = SpdMatrix::trusted(symmetrize(r * r.transpose()));
    spec.sigma = sigma;
    spec.sigma0 = spectral_radius(spec.gamma) < 1.0 ? solve_lyapunov(spec.gamma, spec.q) : spec.q;
    spec.meta = SpecMeta{dist, seed, rho_target};
    return spec;
}

ValidationReport validate_spec(const LgdsSpec& spec)
{
    ValidationReport rep;
    const Eigen::Index d = spec.d();
    rep.dimensions_consistent = spec.gamma.rows() == spec.gamma.cols() && spec.actions.cols() == d &&
                                spec.q.dim() == d && spec.sigma0.dim() == d && d > 0 &&
                                spec.k() > 0 && spec.gamma.allFinite();
    if (!rep.dimensions_consistent) {
        rep.controllable = false;
        return rep;
    }

    for (Eigen::Index i = 0; i < spec.k(); ++i) {
        const double dev = std::abs(spec.actions.row(i).norm() - 1.0);
        rep.action_norm_deviation.push_back(dev);
        if (!(dev <= Tolerances::unit_norm)) rep.actions_unit_norm = false;
    }
    rep.q_psd = is_psd(spec.q.matrix());
    rep.sigma0_psd = is_psd(spec.sigma0.matrix());
    rep.sigma_positive = spec.sigma > 0.0 && std::isfinite(spec.sigma);
    rep.spectral_radius = spectral_radius(spec.gamma);

    if (rep.q_psd) {
        const Matrix root = psd_sqrt(spec.q).matrix();
        Matrix ctrb(d, d * d);
        Matrix block = root;
        for (Eigen::Index i = 0; i < d; ++i) {
            ctrb.middleCols(i * d, d) = block;
            block = spec.gamma * block;
        }
        rep.controllability_rank = numerical_rank(ctrb);
        rep.controllable = rep.controllability_rank == d;
    } else {
        rep.controllable = false;
    }
    return rep;
}

EnvState init_state(const LgdsSpec& spec, std::uint64_t seed, std::size_t warmup)
{
    EnvState state{
        .z = Vector::Zero(spec.d()),
        .t = 0,
        .process = RandomStream(derive_seed(seed, {stream_tag("process")})),
        .measurement_key = derive_seed(seed, {stream_tag("measurement")}),
        .process_factor = psd_factor(spec.q.matrix()),
    };
    state.z = sample_gaussian(Vector::Zero(spec.d()), spec.sigma0, state.process);
    for (std::size_t i = 0; i < warmup; ++i) step(state, spec);
    state.t = 0;
    return state;
}

void step(EnvState& state, const LgdsSpec& spec)
{
    state.z = sample_gaussian_factored(spec.gamma * state.z, state.process_factor, state.process);
    ++state.t;
}

double measurement_noise(const EnvState& state, std::size_t action_index)
{
    return counter_normal(state.measurement_key, state.t, action_index);
}

double observe(const EnvState& state, const LgdsSpec& spec, std::size_t action_index)
{
    if (action_index >= static_cast<std::size_t>(spec.k())) {
        throw DimensionError("observe: action index out of range");
    }
    const double mean = spec.actions.row(static_cast<Eigen::Index>(action_index)).dot(state.z);
    if (spec.sigma == 0.0) return mean;
    return mean + spec.sigma * measurement_noise(state, action_index);
}

Vector observe_all(const EnvState& state, const LgdsSpec& spec)
{
    Vector x(spec.k());
    for (Eigen::Index i = 0; i < spec.k(); ++i) x(i) = observe(state, spec, static_cast<std::size_t>(i));
    return x;
}

std::size_t oracle_action(const Vector& z, const LgdsSpec& spec)
{
    const Vector values = spec.actions * z;
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < values.size(); ++i)
        if (values(i) > values(best)) best = i;
    return static_cast<std::size_t>(best);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json matrix_to_json(const Matrix& m)
{
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
    return arr;
}

Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols, const char* name)
{
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows * cols) {
        throw DimensionError(std::string("spec field '") + name + "' has the wrong number of entries");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j.at(static_cast<std::size_t>(i * cols + c)).get<double>();
    return m;
}

}  // namespace

void to_json(nlohmann::json& j, const LgdsSpec& spec)
{
    j = nlohmann::json{
        {"d", spec.d()},
        {"k", spec.k()},
        {"gamma", matrix_to_json(spec.gamma)},
        {"actions", matrix_to_json(spec.actions)},
        {"q", matrix_to_json(spec.q.matrix())},
        {"sigma", spec.sigma},
        {"sigma0", matrix_to_json(spec.sigma0.matrix())},
    };
    if (spec.meta) {
        j["meta"] = {{"dist", std::string(to_string(spec.meta->dist))},
                     {"seed", spec.meta->seed},
                     {"rho_target", spec.meta->rho_target}};
    }
}

void from_json(const nlohmann::json& j, LgdsSpec& spec)
{
    const auto d = j.at("d").get<Eigen::Index>();
    const auto k = j.at("k").get<Eigen::Index>();
    if (d < 1 || k < 1) throw DimensionError("spec: d and k must be positive");
    spec.gamma = matrix_from_json(j.at("gamma"), d, d, "gamma");
    spec.actions = matrix_from_json(j.at("actions"), k, d, "actions");
    spec.q = SpdMatrix::checked(matrix_from_json(j.at("q"), d, d, "q"));
    spec.sigma = j.at("sigma").get<double>();
    spec.sigma0 = SpdMatrix::checked(matrix_from_json(j.at("sigma0"), d, d, "sigma0"));
    spec.meta.reset();
    if (j.contains("meta")) {
        const auto& m = j.at("meta");
        spec.meta = SpecMeta{parse_distribution(m.at("dist").get<std::string>()),
                             m.at("seed").get<std::uint64_t>(), m.at("rho_target").get<double>()};
    }
}

void save_spec(const LgdsSpec& spec, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write spec file '" + path + "'");
    out << nlohmann::json(spec).dump(2) << '\n';
}

LgdsSpec load_spec(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read spec file '" + path + "'");
    return nlohmann::json::parse(in).get<LgdsSpec>();
}

}  // namespace lgb
