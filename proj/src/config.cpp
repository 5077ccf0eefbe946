// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "rmv/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rmv/error.hpp"
#include "rmv/experiments.hpp"

namespace rmv
{
namespace
{
char const* const kMr1 = R"({
  "name": "MR1",
  "problem": {
    "domain": {"type": "interval", "lo": 0, "hi": 1},
    "sigma": 0.5,
    "horizon": 1,
    "controls": {"lo": -1, "hi": 1},
    "drift": {"b0": 0.25, "balpha": 1, "moments": [{"exponents": [1], "beta": -0.5}]},
    "running": {"alpha_weight": 0.1, "state_weight": 1, "x_ref": 0.5},
    "terminal": {"state_weight": 1, "x_ref": 0.5, "mean_weight": 1, "m_ref": 0.5},
    "k1": 1
  },
  "scheme": {"n": 10000, "dt": 0.001, "seed": 0, "truncation": 6},
  "initial_law": {"type": "uniform", "lo": 0.1, "hi": 0.9},
  "policy": {"type": "constant", "alpha": 0}
})";

// Uncontrolled reflected Brownian motion on [0, 1]; the S-functional playground.
char const* const kD1 = R"({
  "name": "D1",
  "problem": {
    "domain": {"type": "interval", "lo": 0, "hi": 1},
    "sigma": 1,
    "horizon": 1,
    "controls": {"lo": 0, "hi": 0},
    "drift": {"b0": 0},
    "k1": 0
  },
  "scheme": {"n": 10000, "dt": 0.001, "seed": 0, "truncation": 6},
  "initial_law": {"type": "uniform", "lo": 0, "hi": 1},
  "policy": {"type": "constant", "alpha": 0}
})";

std::string type_name(Json const& j)
{
    return j.type_name();
}

std::vector<double> as_numbers(Json const& j, std::string const& path)
{
    std::vector<double> out;
    if (j.is_number())
        out.push_back(j.get<double>());
    else if (j.is_array())
    {
        for (std::size_t i = 0; i < j.size(); ++i)
        {
            if (j[i].is_array())
                for (auto const& v : as_numbers(j[i], path + "[" + std::to_string(i) + "]"))
                    out.push_back(v);
            else if (j[i].is_number())
                out.push_back(j[i].get<double>());
            else
                config_fail(path + "[" + std::to_string(i) + "]",
                            "expected a number, got " + type_name(j[i]));
        }
    }
    else
        config_fail(path, "expected a number or an array of numbers, got " + type_name(j));
    for (double v : out)
        if (!std::isfinite(v))
            config_fail(path, "non-finite value");
    return out;
}

Domain parse_domain(Json const& j, std::string const& path)
{
    Fields f(j, path);
    std::string type = f.text("type");
    std::optional<Domain> dom;
    if (type == "interval")
    {
        double lo = f.number("lo"), hi = f.number("hi");
        if (!(lo < hi))
            config_fail(f.at("hi"), "must exceed lo");
        dom = Domain::interval(lo, hi);
    }
    else if (type == "box")
    {
        auto lo = f.numbers("lo"), hi = f.numbers("hi", lo.size());
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i]))
                config_fail(f.at("hi"), "must exceed lo in every coordinate");
        dom = Domain::box(lo, hi);
    }
    else if (type == "ball")
    {
        auto c = f.numbers("center");
        dom = Domain::ball(c, f.positive("radius"));
    }
    else
        config_fail(f.at("type"), "unknown domain type '" + type + "' (interval, box, ball)");
    f.finish();
    return *dom;
}

std::vector<double> parse_sigma(Json const& j, std::string const& path, std::size_t d)
{
    auto v = as_numbers(j, path);
    if (v.size() == 1 && d > 1)
    {
        std::vector<double> s(d * d, 0);
        for (std::size_t i = 0; i < d; ++i)
            s[i * d + i] = v[0];
        return s;
    }
    if (v.size() == d && d > 1)
    {
        std::vector<double> s(d * d, 0);
        for (std::size_t i = 0; i < d; ++i)
            s[i * d + i] = v[i];
        return s;
    }
    if (v.size() != d * d)
        config_fail(path, "expected 1, d or d*d entries with d = " + std::to_string(d));
    return v;
}

ControlProblem parse_problem(Json const& j, std::string const& path)
{
    Fields f(j, path);
    Domain dom = parse_domain(f.need("domain"), f.at("domain"));
    std::size_t d = dom.dim();
    auto sigma = parse_sigma(f.need("sigma"), f.at("sigma"), d);
    double horizon = f.positive("horizon", 1.0);

    Fields fu(f.need("controls"), f.at("controls"));
    ControlSet u{fu.numbers("lo"), {}};
    u.hi = fu.numbers("hi", u.lo.size());
    fu.finish();
    for (std::size_t k = 0; k < u.lo.size(); ++k)
        if (u.lo[k] > u.hi[k])
            config_fail(fu.at("hi"), "control set is empty (lo > hi in component " +
                                         std::to_string(k) + ")");
    std::size_t m = u.lo.size();

    DriftSpec drift;
    if (auto const* dj = f.get("drift"))
    {
        Fields fd(*dj, f.at("drift"));
        drift.b0 = fd.numbers("b0", std::vector<double>(d, 0.0), d);
        drift.bx = fd.numbers("bx", {}, d * d);
        drift.balpha = fd.numbers("balpha", {}, d * m);
        if (auto const* mj = fd.get("moments"))
        {
            if (!mj->is_array())
                config_fail(fd.at("moments"), "expected an array");
            for (std::size_t q = 0; q < mj->size(); ++q)
            {
                Fields fq((*mj)[q], fd.at("moments") + "[" + std::to_string(q) + "]");
                DriftSpec::MomentTerm t;
                for (double e : fq.numbers("exponents", d))
                {
                    if (e < 0 || e != std::floor(e))
                        config_fail(fq.at("exponents"), "exponents must be nonnegative integers");
                    t.exponents.push_back(static_cast<int>(e));
                }
                t.beta = fq.numbers("beta", d);
                fq.finish();
                drift.moments.push_back(std::move(t));
            }
        }
        fd.finish();
    }

    RunningCost run;
    if (auto const* rj = f.get("running"))
    {
        Fields fr(*rj, f.at("running"));
        run.constant = fr.number("constant", 0);
        run.alpha_weight = fr.number("alpha_weight", 0);
        run.state_weight = fr.number("state_weight", 0);
        run.x_ref = fr.numbers("x_ref", std::vector<double>(d, 0.0), d);
        run.mean_weight = fr.number("mean_weight", 0);
        run.m_ref = fr.numbers("m_ref", std::vector<double>(d, 0.0), d);
        fr.finish();
    }
    TerminalCost term;
    if (auto const* tj = f.get("terminal"))
    {
        Fields ft(*tj, f.at("terminal"));
        term.constant = ft.number("constant", 0);
        term.linear = ft.numbers("linear", std::vector<double>(d, 0.0), d);
        term.state_weight = ft.number("state_weight", 0);
        term.x_ref = ft.numbers("x_ref", std::vector<double>(d, 0.0), d);
        term.mean_weight = ft.number("mean_weight", 0);
        term.m_ref = ft.numbers("m_ref", std::vector<double>(d, 0.0), d);
        ft.finish();
    }
    double k1 = f.number("k1", 0);
    if (k1 < 0)
        config_fail(f.at("k1"), "must be nonnegative");
    f.finish();

    try
    {
        ControlProblem prob(dom, sigma, horizon, u, drift, run, term, k1);
        if (!std::isfinite(prob.ellipticity()))
            config_fail(f.at("sigma"), "sigma sigma^T is not uniformly elliptic");
        return prob;
    }
    catch (Error const& e)
    {
        if (e.code() == ErrorCode::config_error)
            throw;
        config_fail(path, e.what());
    }
}

SchemeConfig parse_scheme(Json const* j, std::string const& path)
{
    SchemeConfig s;
    if (!j)
        return s;
    Fields f(*j, path);
    s.n = f.count("n", s.n);
    if (s.n == 0)
        config_fail(f.at("n"), "must be positive");
    s.dt = f.positive("dt", s.dt);
    if (auto const* sj = f.get("seed"))
    {
        if (!sj->is_number_unsigned())
            config_fail(f.at("seed"), "expected a nonnegative integer");
        s.seed = sj->get<std::uint64_t>();
    }
    s.truncation = static_cast<int>(f.count("truncation", 6));
    if (s.truncation < 1)
        config_fail(f.at("truncation"), "must be at least 1");
    f.finish();
    return s;
}

Json resolve_builtins(Json doc)
{
    if (doc.is_object() && doc.contains("problem") && doc["problem"].is_string())
    {
        std::string name = doc["problem"].get<std::string>();
        Json base;
        if (name == "MR1")
            base = Json::parse(kMr1);
        else if (name == "D1")
            base = Json::parse(kD1);
        else
            config_fail("problem", "unknown builtin problem '" + name + "' (MR1, D1)");
        doc["problem"] = base["problem"];
    }
    return doc;
}

RunConfig build(Json doc)
{
    if (!doc.is_object())
        config_fail("<root>", "expected an object");
    doc = resolve_builtins(std::move(doc));
    Fields root(doc, "");
    std::string name = root.text("name", "unnamed");
    ControlProblem prob = parse_problem(root.need("problem"), "problem");
    SchemeConfig scheme = parse_scheme(root.get("scheme"), "scheme");

    InitialLaw law = InitialLaw::uniform_box(prob.domain().lower(), prob.domain().upper());
    if (auto const* lj = root.get("initial_law"))
        law = parse_law(*lj, "initial_law", prob.dim());
    FeedbackPolicy pol = FeedbackPolicy::constant(Point(prob.control_dim(), 0.0));
    if (auto const* pj = root.get("policy"))
        pol = parse_policy(*pj, "policy", prob.dim(), prob.control_dim());

    Json experiments = Json::object();
    if (auto const* ej = root.get("experiments"))
    {
        if (!ej->is_object())
            config_fail("experiments", "expected an object");
        for (auto const& [key, block] : ej->items())
        {
            auto const& names = command_names();
            if (std::find(names.begin(), names.end(), key) == names.end())
                config_fail("experiments." + key, "unknown subcommand");
            validate_experiment(key, block, prob);
        }
        experiments = *ej;
    }
    root.finish();

    std::string hash = content_hash(doc.dump());
    return RunConfig{std::move(name), std::move(prob), scheme,           std::move(law),
                     std::move(pol),  std::move(experiments), std::move(doc), std::move(hash)};
}
}  // namespace

[[noreturn]] void config_fail(std::string const& path, std::string const& what)
{
    fail(ErrorCode::config_error, (path.empty() ? std::string("<root>") : path) + ": " + what);
}

//---------------------------------------------------------------------------//
Fields::Fields(Json const& j, std::string path) : j_(j), path_(std::move(path))
{
    if (!j_.is_object())
        config_fail(path_, "expected an object, got " + type_name(j_));
}

std::string Fields::at(std::string const& key) const
{
    return path_.empty() ? key : path_ + "." + key;
}

bool Fields::has(std::string const& key) const
{
    return j_.contains(key);
}

Json const* Fields::get(std::string const& key)
{
    auto it = j_.find(key);
    if (it == j_.end())
        return nullptr;
    used_.push_back(key);
    return &*it;
}

Json const& Fields::need(std::string const& key)
{
    auto const* v = get(key);
    if (!v)
        config_fail(at(key), "required field missing");
    return *v;
}

double Fields::number(std::string const& key)
{
    auto const& v = need(key);
    if (!v.is_number())
        config_fail(at(key), "expected a number, got " + type_name(v));
    double x = v.get<double>();
    if (!std::isfinite(x))
        config_fail(at(key), "non-finite value");
    return x;
}

double Fields::number(std::string const& key, double fallback)
{
    return has(key) ? number(key) : fallback;
}

double Fields::positive(std::string const& key, std::optional<double> fallback)
{
    if (!has(key) && fallback)
        return *fallback;
    double x = number(key);
    if (!(x > 0))
        config_fail(at(key), "must be positive");
    return x;
}

std::size_t Fields::count(std::string const& key, std::optional<std::size_t> fallback)
{
    if (!has(key) && fallback)
        return *fallback;
    auto const& v = need(key);
    if (!v.is_number_unsigned())
        config_fail(at(key), "expected a nonnegative integer");
    return v.get<std::size_t>();
}

std::string Fields::text(std::string const& key, std::optional<std::string> fallback)
{
    if (!has(key) && fallback)
        return *fallback;
    auto const& v = need(key);
    if (!v.is_string())
        config_fail(at(key), "expected a string, got " + type_name(v));
    return v.get<std::string>();
}

bool Fields::flag(std::string const& key, bool fallback)
{
    if (!has(key))
        return fallback;
    auto const& v = need(key);
    if (!v.is_boolean())
        config_fail(at(key), "expected true or false");
    return v.get<bool>();
}

std::vector<double> Fields::numbers(std::string const& key, std::size_t len)
{
    auto v = as_numbers(need(key), at(key));
    if (len > 0 && v.size() != len)
        config_fail(at(key), "expected " + std::to_string(len) + " entries, got " +
                                 std::to_string(v.size()));
    if (v.empty())
        config_fail(at(key), "empty array");
    return v;
}

std::vector<double> Fields::numbers(std::string const& key, std::vector<double> fallback,
                                    std::size_t len)
{
    return has(key) ? numbers(key, len) : fallback;
}

void Fields::finish() const
{
    for (auto const& [key, value] : j_.items())
        if (std::find(used_.begin(), used_.end(), key) == used_.end())
            config_fail(at(key), "unknown field");
}

//---------------------------------------------------------------------------//
InitialLaw parse_law(Json const& j, std::string const& path, std::size_t dim)
{
    Fields f(j, path);
    std::string type = f.text("type");
    std::optional<InitialLaw> law;
    if (type == "dirac")
        law = InitialLaw::dirac(f.numbers("x", dim));
    else if (type == "uniform")
    {
        auto lo = f.numbers("lo", dim), hi = f.numbers("hi", dim);
        for (std::size_t i = 0; i < dim; ++i)
            if (lo[i] > hi[i])
                config_fail(f.at("hi"), "must not be below lo");
        law = InitialLaw::uniform_box(lo, hi);
    }
    else if (type == "density")
    {
        if (dim != 1)
            config_fail(f.at("type"), "density laws are one-dimensional");
        double a = f.number("a"), b = f.number("b");
        auto cells = f.numbers("cells");
        for (double c : cells)
            if (c < 0)
                config_fail(f.at("cells"), "negative density value");
        law = InitialLaw::density_1d(a, b, cells);
    }
    else
        config_fail(f.at("type"), "unknown law type '" + type + "' (dirac, uniform, density)");
    f.finish();
    return *law;
}

FeedbackPolicy parse_policy(Json const& j, std::string const& path, std::size_t dim,
                            std::size_t control_dim)
{
    Fields f(j, path);
    std::string type = f.text("type");
    std::string name = f.text("name", "");
    std::optional<FeedbackPolicy> pol;
    if (type == "constant")
        pol = FeedbackPolicy::constant(f.numbers("alpha", control_dim), name);
    else if (type == "affine")
    {
        auto c0 = f.numbers("c0", control_dim);
        auto state = f.numbers("state", {}, control_dim * dim);
        std::vector<MultiIndex> exps;
        std::vector<Point> coefs;
        if (auto const* mj = f.get("moments"))
        {
            if (!mj->is_array())
                config_fail(f.at("moments"), "expected an array");
            for (std::size_t q = 0; q < mj->size(); ++q)
            {
                Fields fq((*mj)[q], f.at("moments") + "[" + std::to_string(q) + "]");
                MultiIndex e;
                for (double v : fq.numbers("exponents", dim))
                {
                    if (v < 0 || v != std::floor(v))
                        config_fail(fq.at("exponents"), "exponents must be nonnegative integers");
                    e.push_back(static_cast<int>(v));
                }
                exps.push_back(e);
                coefs.push_back(fq.numbers("coef", control_dim));
                fq.finish();
            }
        }
        pol = FeedbackPolicy::affine(c0, exps, coefs, state, name);
    }
    else
        config_fail(f.at("type"), "unknown policy type '" + type + "' (constant, affine)");
    f.finish();
    return *pol;
}

//---------------------------------------------------------------------------//
Json RunConfig::experiment(std::string const& key) const
{
    auto it = experiments.find(key);
    return it == experiments.end() ? Json::object() : *it;
}

std::string content_hash(std::string const& bytes)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes)
    {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig parse_config(std::string const& text, std::string const& source)
{
    Json doc;
    try
    {
        doc = Json::parse(text);
    }
    catch (Json::parse_error const& e)
    {
        // Translate the byte offset into line:column.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
        {
            if (text[i] == '\n')
            {
                ++line;
                col = 1;
            }
            else
                ++col;
        }
        std::string msg = e.what();
        auto pos = msg.find("syntax error");
        fail(ErrorCode::config_error, source + ":" + std::to_string(line) + ":" +
                                          std::to_string(col) + ": " +
                                          (pos == std::string::npos ? msg : msg.substr(pos)));
    }
    try
    {
        return build(std::move(doc));
    }
    catch (Error const& e)
    {
        if (e.code() == ErrorCode::config_error)
            fail(ErrorCode::config_error, source + ": " + e.what());
        throw;
    }
}

RunConfig load_config(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::io_error, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

RunConfig builtin_config(std::string const& name)
{
    if (name == "MR1")
        return parse_config(kMr1, "builtin:MR1");
    if (name == "D1")
        return parse_config(kD1, "builtin:D1");
    fail(ErrorCode::config_error, "unknown builtin config '" + name + "' (MR1, D1)");
}

RunConfig with_seed(RunConfig const& cfg, std::uint64_t seed)
{
    Json doc = cfg.effective;
    doc["scheme"]["seed"] = seed;
    return build(std::move(doc));
}
}  // namespace rmv
