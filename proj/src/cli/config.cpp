#include "phsim/cli/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace phsim::cli {

namespace {

std::string format_message(const std::string& field, std::optional<int> line,
                           const std::string& message)
{
    std::ostringstream os;
    if (line)
        os << "line " << *line << ": ";
    if (!field.empty())
        os << field << ": ";
    os << message;
    return os.str();
}

std::optional<int> line_of(const YAML::Node& node)
{
    if (!node.IsDefined())
        return std::nullopt;
    const YAML::Mark mark = node.Mark();
    if (mark.is_null())
        return std::nullopt;
    return mark.line + 1;
}

/// A YAML node together with its dotted path, for error messages.
class Field {
public:
    Field(YAML::Node node, std::string path, std::optional<int> fallback_line = std::nullopt)
        : node_(std::move(node)), path_(std::move(path)), fallback_line_(fallback_line)
    {
    }

    const std::string& path() const { return path_; }
    const YAML::Node& node() const { return node_; }
    bool present() const { return node_.IsDefined() && !node_.IsNull(); }

    std::optional<int> line() const
    {
        auto l = line_of(node_);
        return l ? l : fallback_line_;
    }

    [[noreturn]] void fail(const std::string& message) const
    {
        throw ConfigError(ConfigError::Kind::semantic, path_, line(), message);
    }

    Field child(const std::string& key) const
    {
        return {node_[key], path_.empty() ? key : path_ + "." + key, line()};
    }

    Field at(std::size_t index) const
    {
        return {node_[index], path_ + "[" + std::to_string(index) + "]", line()};
    }

    Field required(const std::string& key) const
    {
        Field f = child(key);
        if (!f.present())
            f.fail("required field is missing");
        return f;
    }

    void expect_map() const
    {
        if (!node_.IsMap())
            fail("expected a mapping");
    }

    void expect_sequence(std::optional<std::size_t> length = std::nullopt) const
    {
        if (!node_.IsSequence())
            fail("expected a list");
        if (length && node_.size() != *length)
            fail("expected " + std::to_string(*length) + " entries, got " +
                 std::to_string(node_.size()));
    }

    void allow_keys(std::initializer_list<const char*> keys) const
    {
        expect_map();
        const std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) {
                Field unknown{kv.first, path_.empty() ? key : path_ + "." + key, line()};
                unknown.fail("unknown key");
            }
        }
    }

    double as_double() const
    {
        if (!node_.IsScalar())
            fail("expected a number");
        try {
            return node_.as<double>();
        } catch (const YAML::BadConversion&) {
            fail("expected a number, got '" + node_.Scalar() + "'");
        }
    }

    long as_integer() const
    {
        if (!node_.IsScalar())
            fail("expected an integer");
        try {
            return node_.as<long>();
        } catch (const YAML::BadConversion&) {
            fail("expected an integer, got '" + node_.Scalar() + "'");
        }
    }

    std::string as_string() const
    {
        if (!node_.IsScalar())
            fail("expected a string");
        return node_.Scalar();
    }

    double double_or(const std::string& key, double fallback) const
    {
        const Field f = child(key);
        return f.present() ? f.as_double() : fallback;
    }

    std::string string_or(const std::string& key, const std::string& fallback) const
    {
        const Field f = child(key);
        return f.present() ? f.as_string() : fallback;
    }

    Vec3 as_vec3() const
    {
        expect_sequence(3);
        return {at(0).as_double(), at(1).as_double(), at(2).as_double()};
    }

private:
    YAML::Node node_;
    std::string path_;
    std::optional<int> fallback_line_;
};

template <typename Check>
double checked(const Field& f, double value, Check&& ok, const std::string& constraint)
{
    if (!std::isfinite(value) || !ok(value)) {
        std::ostringstream os;
        os << "must be " << constraint << " (got " << value << ")";
        f.fail(os.str());
    }
    return value;
}

double positive(const Field& f)
{
    return checked(f, f.as_double(), [](double v) { return v > 0.0; }, "positive");
}

ElasticElement parse_element(const Field& f, std::size_t n_points)
{
    f.allow_keys({"stiffness", "rest_length", "coefficients", "ends"});
    ElasticElement e;
    const Field k = f.required("stiffness");
    e.stiffness = checked(k, k.as_double(), [](double v) { return v >= 0.0; }, "non-negative");
    e.rest_length = positive(f.required("rest_length"));

    const Field coeffs = f.child("coefficients");
    const Field ends = f.child("ends");
    if (coeffs.present() == ends.present())
        f.fail("exactly one of 'coefficients' or 'ends' is required");

    auto point_index = [&](const Field& idx) {
        const long j = idx.as_integer();
        if (j < 0 || static_cast<std::size_t>(j) >= n_points)
            idx.fail("point index " + std::to_string(j) + " out of range [0, " +
                     std::to_string(n_points) + ")");
        return static_cast<std::size_t>(j);
    };

    if (ends.present()) {
        ends.expect_sequence();
        if (ends.node().size() == 1) {
            e.coefficients = {{point_index(ends.at(0)), 1.0}};
        } else if (ends.node().size() == 2) {
            e.coefficients = {{point_index(ends.at(0)), 1.0}, {point_index(ends.at(1)), -1.0}};
        } else {
            ends.fail("expected one (anchored) or two point indices");
        }
    } else {
        coeffs.expect_map();
        bool any_nonzero = false;
        for (const auto& kv : coeffs.node()) {
            const Field key{kv.first, coeffs.path(), coeffs.line()};
            const std::size_t j = point_index(key);
            const Field value{kv.second, coeffs.path() + "." + std::to_string(j), coeffs.line()};
            const double a = value.as_double();
            any_nonzero = any_nonzero || a != 0.0;
            e.coefficients.emplace_back(j, a);
        }
        if (!any_nonzero)
            coeffs.fail("at least one coefficient must be nonzero");
    }
    return e;
}

Vector parse_point_vectors(const Field& f, std::size_t n_points)
{
    f.expect_sequence(n_points);
    Vector out(3 * n_points);
    for (std::size_t k = 0; k < n_points; ++k)
        out.segment<3>(3 * k) = f.at(k).as_vec3();
    return out;
}

IntegratorParams parse_integrator(const Field& f)
{
    f.allow_keys({"scheme", "jacobian", "h", "t0", "t_end", "newton_tol", "newton_max_iters",
                  "fallback_threshold", "consistency_tol", "on_inconsistent"});
    IntegratorParams p;
    p.h = positive(f.required("h"));
    p.t0 = f.double_or("t0", 0.0);
    const Field t_end = f.required("t_end");
    p.t_end = checked(t_end, t_end.as_double(), [&](double v) { return v >= p.t0; }, ">= t0");
    if (p.t_end > p.t0 && p.h > p.t_end - p.t0)
        f.child("h").fail("must not exceed t_end - t0");
    if (f.child("newton_tol").present())
        p.newton_tol = positive(f.child("newton_tol"));
    if (const Field it = f.child("newton_max_iters"); it.present()) {
        const long n = it.as_integer();
        if (n < 1)
            it.fail("must be at least 1");
        p.newton_max_iters = static_cast<int>(n);
    }
    if (f.child("fallback_threshold").present())
        p.dgrad.fallback_threshold = positive(f.child("fallback_threshold"));
    if (const Field c = f.child("consistency_tol"); c.present())
        p.consistency_tol = checked(c, c.as_double(), [](double v) { return v >= 0.0; },
                                    "non-negative");

    if (const Field s = f.child("scheme"); s.present()) {
        try {
            p.scheme = parse_scheme(s.as_string());
        } catch (const std::invalid_argument& e) {
            s.fail(e.what());
        }
    }
    const std::string jac = f.string_or("jacobian", "finite_difference");
    if (jac == "finite_difference")
        p.jacobian_mode = JacobianMode::finite_difference;
    else if (jac == "analytic")
        p.jacobian_mode = JacobianMode::analytic;
    else
        f.child("jacobian").fail("expected 'finite_difference' or 'analytic'");

    const std::string policy = f.string_or("on_inconsistent", "error");
    if (policy == "error")
        p.on_inconsistent = InconsistentInitialPolicy::error;
    else if (policy == "warn")
        p.on_inconsistent = InconsistentInitialPolicy::warn;
    else
        f.child("on_inconsistent").fail("expected 'error' or 'warn'");
    return p;
}

} // namespace

ConfigError::ConfigError(Kind kind, std::string field, std::optional<int> line,
                         const std::string& message)
    : std::runtime_error(format_message(field, line, message)), kind_(kind),
      field_(std::move(field)), line_(line)
{
}

InputSignal InputSelection::signal() const
{
    return kind == InputKind::viscous ? InputSignal::viscous(damping) : InputSignal::zero();
}

Scheme parse_scheme(const std::string& name)
{
    if (name == "discrete_gradient")
        return Scheme::discrete_gradient;
    if (name == "implicit_midpoint")
        return Scheme::implicit_midpoint;
    throw std::invalid_argument("unknown scheme '" + name +
                                "' (expected 'discrete_gradient' or 'implicit_midpoint')");
}

RunConfig parse_config(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        std::optional<int> line;
        if (!e.mark.is_null())
            line = e.mark.line + 1;
        throw ConfigError(ConfigError::Kind::syntax, "", line, e.msg);
    }
    const Field top{root, ""};
    if (!root.IsMap())
        throw ConfigError(ConfigError::Kind::syntax, "", line_of(root),
                          "the configuration must be a mapping");
    top.allow_keys({"version", "system", "initial", "integrator", "input", "report", "output"});

    const Field version = top.required("version");
    if (version.as_integer() != kConfigVersion)
        version.fail("unsupported version " + version.as_string() + " (supported: " +
                     std::to_string(kConfigVersion) + ")");

    // system
    const Field sys = top.required("system");
    sys.allow_keys({"gravity", "points", "elements", "input_map"});
    const Field points = sys.required("points");
    points.expect_sequence();
    if (points.node().size() == 0)
        points.fail("at least one point is required");
    std::vector<double> masses;
    for (std::size_t k = 0; k < points.node().size(); ++k) {
        const Field p = points.at(k);
        p.allow_keys({"mass"});
        masses.push_back(positive(p.required("mass")));
    }
    const std::size_t n_points = masses.size();

    std::vector<ElasticElement> elements;
    if (const Field els = sys.child("elements"); els.present()) {
        els.expect_sequence();
        for (std::size_t i = 0; i < els.node().size(); ++i)
            elements.push_back(parse_element(els.at(i), n_points));
    }

    const Vec3 gravity = sys.child("gravity").present() ? sys.child("gravity").as_vec3()
                                                        : Vec3::Zero();
    std::optional<Matrix> input_map;
    const std::string map_kind = sys.string_or("input_map", "identity");
    if (map_kind == "none")
        input_map = Matrix::Zero(3 * n_points, 3 * n_points);
    else if (map_kind != "identity")
        sys.child("input_map").fail("expected 'identity' or 'none'");

    std::optional<MechanicalSystem> system;
    try {
        system.emplace(std::move(masses), std::move(elements), gravity, input_map);
    } catch (const std::invalid_argument& e) {
        sys.fail(e.what());
    }

    // integrator
    const IntegratorParams params = parse_integrator(top.required("integrator"));

    // initial conditions
    const Field init = top.required("initial");
    init.allow_keys({"q", "v", "C"});
    State x0;
    x0.q = parse_point_vectors(init.required("q"), n_points);
    x0.v = parse_point_vectors(init.required("v"), n_points);
    const Vector C_tilde = strain_map(*system, x0.q);
    bool strain_given = false;
    if (const Field C = init.child("C"); C.present()) {
        C.expect_sequence(system->n_elements());
        x0.C.resize(static_cast<Eigen::Index>(system->n_elements()));
        for (std::size_t i = 0; i < system->n_elements(); ++i)
            x0.C[i] = positive(C.at(i));
        const double gap = (x0.C - C_tilde).lpNorm<Eigen::Infinity>();
        if (gap > params.consistency_tol &&
            params.on_inconsistent == InconsistentInitialPolicy::error) {
            std::ostringstream os;
            os << "inconsistent with the initial positions: |C - Ctilde(q)|_inf = " << gap
               << " exceeds integrator.consistency_tol = " << params.consistency_tol;
            C.fail(os.str());
        }
        strain_given = true;
    } else {
        for (Eigen::Index i = 0; i < C_tilde.size(); ++i)
            if (!(C_tilde[i] > 0.0))
                init.child("q").fail("element " + std::to_string(i) +
                                     " has zero length, so its strain is outside the energy's domain");
        x0.C = C_tilde;
    }

    // input
    InputSelection input;
    if (const Field in = top.child("input"); in.present()) {
        in.allow_keys({"type", "damping"});
        const std::string type = in.string_or("type", "none");
        if (type == "viscous") {
            input.kind = InputKind::viscous;
            const Field d = in.required("damping");
            input.damping =
                checked(d, d.as_double(), [](double v) { return v >= 0.0; }, "non-negative");
            if (system->n_inputs() != system->n_dofs())
                in.child("type").fail("viscous input requires system.input_map: identity");
        } else if (type != "none") {
            in.child("type").fail("expected 'none' or 'viscous'");
        }
    }

    // report tolerances
    ReportTolerances tol;
    if (const Field rep = top.child("report"); rep.present()) {
        rep.allow_keys({"energy_tol", "angular_momentum_tol", "kinematic_tol"});
        if (rep.child("energy_tol").present())
            tol.energy = positive(rep.child("energy_tol"));
        if (rep.child("angular_momentum_tol").present())
            tol.angular_momentum = positive(rep.child("angular_momentum_tol"));
        if (rep.child("kinematic_tol").present())
            tol.kinematic = positive(rep.child("kinematic_tol"));
    }
    tol.check_angular_momentum = input.kind == InputKind::none;

    OutputPaths output;
    if (const Field out = top.child("output"); out.present()) {
        out.allow_keys({"trajectory", "report"});
        output.trajectory = out.string_or("trajectory", "");
        output.report = out.string_or("report", "");
    }

    return RunConfig{kConfigVersion, std::move(*system), std::move(x0), strain_given,
                     params, input, tol, std::move(output)};
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(ConfigError::Kind::io, "", std::nullopt, "cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void apply_overrides(RunConfig& config, const Overrides& overrides)
{
    IntegratorParams& p = config.integrator;
    if (overrides.h)
        p.h = *overrides.h;
    if (overrides.t_end)
        p.t_end = *overrides.t_end;
    if (overrides.scheme)
        p.scheme = *overrides.scheme;
    if (overrides.newton_tol)
        p.newton_tol = *overrides.newton_tol;
    if (overrides.trajectory_path)
        config.output.trajectory = *overrides.trajectory_path;
    if (overrides.report_path)
        config.output.report = *overrides.report_path;
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(ConfigError::Kind::semantic, "integrator", std::nullopt, e.what());
    }
}

} // namespace phsim::cli
