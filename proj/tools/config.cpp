#include "app.hpp"

#include "reslab/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace reslab::app {

namespace {

using Cmds = std::vector<Subcommand>;
const Cmds kAll{Subcommand::Scatter, Subcommand::Resonances, Subcommand::Evolve, Subcommand::Compare,
                Subcommand::Adiabatic};
const Cmds kModel{Subcommand::Scatter, Subcommand::Resonances};
const Cmds kScheme{Subcommand::Evolve, Subcommand::Compare};
const Cmds kTheta{Subcommand::Scatter, Subcommand::Resonances, Subcommand::Evolve, Subcommand::Compare};

struct KeySpec {
    std::string name;
    std::string def;  // empty: unset unless given
    Cmds used_by;
    std::string note;
};

const std::vector<KeySpec>& registry()
{
    static const std::vector<KeySpec> keys = {
        {"run.seed", "7", kAll, "seed of the random accretivity probes"},
        {"model.a", "0", kModel, "left interface"},
        {"model.b", "1", kModel, "right interface"},
        {"model.c", "0.2", kModel, "structural constant, V >= c on (a,b)"},
        {"model.h", "0.1", kModel, "semiclassical parameter"},
        {"model.lambda0", "", kModel, "reference energy, default: each Dirichlet eigenvalue in the window"},
        {"barrier.kind", "constant", kModel, "constant | table"},
        {"barrier.v0", "1", kModel, "height of the constant barrier"},
        {"barrier.xs", "", kModel, "table abscissae covering [a,b]"},
        {"barrier.vs", "", kModel, "table values"},
        {"wells.delta", "[[0.5, 1]]", kModel, "delta wells [[c, alpha], ...], strength alpha h"},
        {"theta0.re", "0", kTheta, "real part of the interface parameter"},
        {"theta0.im", "0", kTheta, "imaginary part; a value given to adiabatic is the deformation angle tau"},
        {"scatter.k_min", "0.05", {Subcommand::Scatter}, "first momentum"},
        {"scatter.k_max", "3", {Subcommand::Scatter}, "last momentum"},
        {"scatter.k_count", "200", {Subcommand::Scatter}, "number of momenta"},
        {"resonances.h_list", "", {Subcommand::Resonances}, "list of h, default model.h"},
        {"resonances.lo", "", {Subcommand::Resonances}, "search window, default c"},
        {"resonances.hi", "", {Subcommand::Resonances}, "search window, default inf V - c"},
        {"resonances.n0", "2", {Subcommand::Resonances}, "contour depth exponent"},
        {"resonances.xi", "1", {Subcommand::Resonances}, "contour half width in units of h"},
        {"resonances.fgr", "true", {Subcommand::Resonances}, "evaluate the Fermi golden rule"},
        {"resonances.points_per_unit", "4000", {Subcommand::Resonances}, "grid density"},
        {"resonances.pad", "0", {Subcommand::Resonances}, "exterior grid length on each side"},
        {"scheme.j", "30", kScheme, "grid points per unit length"},
        {"scheme.half_width", "5", kScheme, "grid is [-half_width, half_width], interfaces at -1 and 1"},
        {"scheme.dt", "0.8", kScheme, "time step"},
        {"scheme.n_steps", "400", kScheme, "number of steps"},
        {"scheme.tbc", "exact", kScheme, "exact | padded | dirichlet"},
        {"scheme.h", "0.03", kScheme, "h / ell"},
        {"scheme.potential", "none", kScheme, "none | barrier"},
        {"scheme.v0", "0.8", kScheme, "barrier height on [-1, 1]"},
        {"scheme.snapshot_every", "10", kScheme, "evolve: snapshot stride"},
        {"scheme.pad_to", "40", kScheme, "half width of the padded reference domain"},
        {"packet.x0", "-3", kScheme, "centre; compare accepts a list"},
        {"packet.sigma", "0.2", kScheme, "width"},
        {"packet.k", "", kScheme, "momentum, default 2 pi / (8 dx)"},
        {"compare.im_list", "0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09", {Subcommand::Compare},
         "Im theta0 values"},
        {"compare.potentials", "none", {Subcommand::Compare}, "list of none | barrier"},
        {"adiabatic.tau", "0.3", {Subcommand::Adiabatic}, "deformation angle, 0 < tau < pi/4"},
        {"adiabatic.eps_list", "0.01, 0.003, 0.001", {Subcommand::Adiabatic}, "adiabatic parameters, descending"},
        {"adiabatic.t_final", "1", {Subcommand::Adiabatic}, "end of the drive, start is 0"},
        {"adiabatic.drive.kind", "sine", {Subcommand::Adiabatic}, "sine | frozen"},
        {"adiabatic.drive.amplitude", "0.2", {Subcommand::Adiabatic}, "relative modulation of alpha(t)"},
        {"adiabatic.alpha0", "1", {Subcommand::Adiabatic}, "mean delta strength"},
        {"adiabatic.h", "0.05", {Subcommand::Adiabatic}, "semiclassical parameter"},
        {"adiabatic.intervals", "200", {Subcommand::Adiabatic}, "projector samples on [0, t_final], even"},
        {"adiabatic.lambda0", "0.75", {Subcommand::Adiabatic}, "energy guess for the resonance"},
        {"adiabatic.points_per_unit", "200", {Subcommand::Adiabatic}, "grid density"},
        {"adiabatic.pad", "3", {Subcommand::Adiabatic}, "exterior grid length on each side"},
    };
    return keys;
}

const KeySpec* find_key(const std::string& name)
{
    for (const auto& k : registry())
        if (k.name == name) return &k;
    return nullptr;
}

[[noreturn]] void type_error(const std::string& key, const std::string& text, const char* expected)
{
    throw Error(ErrorKind::TypeMismatch, key + " = '" + text + "': expected " + expected);
}

[[noreturn]] void violated(const std::string& key, const std::string& what)
{
    throw Error(ErrorKind::ConstraintViolation, key + ": " + what);
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::optional<double> to_double(const std::string& s)
{
    const std::string t = trim(s);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::vector<std::string> split_list(const std::string& text)
{
    std::string t = text;
    std::replace(t.begin(), t.end(), '[', ' ');
    std::replace(t.begin(), t.end(), ']', ' ');
    std::vector<std::string> out;
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

class Reader {
public:
    explicit Reader(const RunConfig& c) : c_(c) {}

    const std::string& text(const std::string& key) const { return c_.values.at(key); }
    bool present(const std::string& key) const { return !trim(text(key)).empty(); }

    double real(const std::string& key) const
    {
        const auto v = to_double(text(key));
        if (!v) type_error(key, text(key), "a real number");
        return *v;
    }
    std::optional<double> opt_real(const std::string& key) const
    {
        if (!present(key)) return std::nullopt;
        return real(key);
    }
    int integer(const std::string& key) const
    {
        const std::string t = trim(text(key));
        long long v = 0;
        const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || p != t.data() + t.size() || t.empty() || v < INT32_MIN || v > INT32_MAX)
            type_error(key, t, "an integer");
        return static_cast<int>(v);
    }
    bool boolean(const std::string& key) const
    {
        const std::string t = trim(text(key));
        if (t == "true") return true;
        if (t == "false") return false;
        type_error(key, t, "true or false");
    }
    std::string choice(const std::string& key, const std::vector<std::string>& allowed) const
    {
        const std::string t = trim(text(key));
        if (std::find(allowed.begin(), allowed.end(), t) == allowed.end()) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : " | ") + a;
            type_error(key, t, list.c_str());
        }
        return t;
    }
    std::vector<double> reals(const std::string& key) const
    {
        std::vector<double> out;
        for (const auto& item : split_list(text(key))) {
            const auto v = to_double(item);
            if (!v) type_error(key, text(key), "a list of real numbers");
            out.push_back(*v);
        }
        return out;
    }
    std::vector<std::string> words(const std::string& key, const std::vector<std::string>& allowed) const
    {
        std::vector<std::string> out = split_list(text(key));
        for (const auto& w : out)
            if (std::find(allowed.begin(), allowed.end(), w) == allowed.end())
                type_error(key, text(key), "a list of known names");
        return out;
    }

private:
    const RunConfig& c_;
};

void positive(const std::string& key, double v)
{
    if (!(v > 0.0)) violated(key, "must be positive");
}

void fill_typed(RunConfig& c)
{
    const Reader r(c);
    const int seed = r.integer("run.seed");
    if (seed < 0) violated("run.seed", "must be nonnegative");
    c.seed = static_cast<std::uint64_t>(seed);

    ModelBlock& m = c.model;
    m.a = r.real("model.a");
    m.b = r.real("model.b");
    m.c = r.real("model.c");
    m.h = r.real("model.h");
    m.lambda0 = r.opt_real("model.lambda0");
    m.barrier_kind = r.choice("barrier.kind", {"constant", "table"});
    m.v0 = r.real("barrier.v0");
    m.xs = r.reals("barrier.xs");
    m.vs = r.reals("barrier.vs");
    const std::vector<double> flat = r.reals("wells.delta");
    if (flat.size() % 2 != 0) type_error("wells.delta", r.text("wells.delta"), "pairs [c, alpha]");
    m.deltas.clear();
    for (std::size_t i = 0; i < flat.size(); i += 2) m.deltas.push_back({flat[i], flat[i + 1]});
    if (!(m.a < m.b)) violated("model.a", "need a < b");
    positive("model.c", m.c);
    if (!(m.h > 0.0 && m.h <= 1.0)) violated("model.h", "need 0 < h <= 1");
    if (m.barrier_kind == "table" && m.xs.size() != m.vs.size())
        violated("barrier.vs", "needs as many entries as barrier.xs");

    c.theta0 = cplx(r.real("theta0.re"), r.real("theta0.im"));

    ScatterBlock& s = c.scatter;
    s.k_min = r.real("scatter.k_min");
    s.k_max = r.real("scatter.k_max");
    s.k_count = r.integer("scatter.k_count");
    if (s.k_count < 1) violated("scatter.k_count", "must be at least 1");
    if (s.k_max < s.k_min) violated("scatter.k_max", "must not be below scatter.k_min");

    ResonanceBlock& rb = c.resonances;
    rb.h_list = r.reals("resonances.h_list");
    for (double h : rb.h_list)
        if (!(h > 0.0 && h <= 1.0)) violated("resonances.h_list", "need 0 < h <= 1");
    rb.lo = r.opt_real("resonances.lo");
    rb.hi = r.opt_real("resonances.hi");
    rb.n0 = r.integer("resonances.n0");
    rb.xi = r.real("resonances.xi");
    rb.fgr = r.boolean("resonances.fgr");
    rb.points_per_unit = r.integer("resonances.points_per_unit");
    rb.pad = r.real("resonances.pad");
    if (rb.n0 < 1) violated("resonances.n0", "must be at least 1");
    positive("resonances.xi", rb.xi);
    if (rb.points_per_unit < 2) violated("resonances.points_per_unit", "must be at least 2");
    if (rb.pad < 0.0) violated("resonances.pad", "must be nonnegative");
    if (rb.lo && rb.hi && !(*rb.lo < *rb.hi)) violated("resonances.hi", "must exceed resonances.lo");

    SchemeBlock& sc = c.scheme;
    sc.j = r.integer("scheme.j");
    sc.half_width = r.real("scheme.half_width");
    sc.dt = r.real("scheme.dt");
    sc.n_steps = r.integer("scheme.n_steps");
    sc.tbc = parse_tbc_mode(r.choice("scheme.tbc", {"exact", "padded", "dirichlet"}));
    sc.h = r.real("scheme.h");
    sc.potential = r.choice("scheme.potential", {"none", "barrier"});
    sc.v0 = r.real("scheme.v0");
    sc.snapshot_every = r.integer("scheme.snapshot_every");
    sc.pad_to = r.real("scheme.pad_to");
    if (sc.j < 1) violated("scheme.j", "must be at least 1");
    if (!(sc.half_width > 1.0)) violated("scheme.half_width", "must exceed 1, the interfaces sit at -1 and 1");
    positive("scheme.dt", sc.dt);
    if (sc.n_steps < 1) violated("scheme.n_steps", "must be at least 1");
    if (!(sc.h > 0.0 && sc.h <= 1.0)) violated("scheme.h", "need 0 < h <= 1");
    if (sc.snapshot_every < 1) violated("scheme.snapshot_every", "must be at least 1");
    if (!(sc.pad_to > sc.half_width)) violated("scheme.pad_to", "must exceed scheme.half_width");

    PacketBlock& p = c.packet;
    p.x0 = r.reals("packet.x0");
    if (p.x0.empty()) violated("packet.x0", "needs a value");
    p.sigma = r.real("packet.sigma");
    positive("packet.sigma", p.sigma);
    p.k = r.opt_real("packet.k");
    for (double x : p.x0)
        if (std::abs(x) >= sc.half_width) violated("packet.x0", "must lie inside the grid");
    if (c.cmd == Subcommand::Evolve && p.x0.size() != 1) violated("packet.x0", "evolve takes a single centre");

    CompareBlock& cb = c.compare;
    cb.im_list = r.reals("compare.im_list");
    cb.potentials = r.words("compare.potentials", {"none", "barrier"});
    if (cb.im_list.empty()) violated("compare.im_list", "needs at least one value");
    if (cb.potentials.empty()) violated("compare.potentials", "needs at least one entry");

    AdiabaticBlock& ad = c.adiabatic;
    ad.tau = r.real("adiabatic.tau");
    ad.eps_list = r.reals("adiabatic.eps_list");
    ad.t_final = r.real("adiabatic.t_final");
    ad.drive_kind = r.choice("adiabatic.drive.kind", {"sine", "frozen"}) == "sine" ? DriveKind::Sine
                                                                                   : DriveKind::Frozen;
    ad.drive_amplitude = r.real("adiabatic.drive.amplitude");
    ad.alpha0 = r.real("adiabatic.alpha0");
    ad.h = r.real("adiabatic.h");
    ad.intervals = r.integer("adiabatic.intervals");
    ad.lambda0 = r.real("adiabatic.lambda0");
    ad.points_per_unit = r.integer("adiabatic.points_per_unit");
    ad.pad = r.real("adiabatic.pad");
    if (c.cmd == Subcommand::Adiabatic && c.explicit_keys.count("theta0.im")) {
        const double im = c.theta0.imag();
        if (!(im > 0.0)) violated("theta0.im", "the deformation angle tau must be positive");
        if (c.explicit_keys.count("adiabatic.tau") && ad.tau != im)
            violated("theta0.im", "disagrees with adiabatic.tau");
        ad.tau = im;
    }
    if (c.cmd == Subcommand::Adiabatic && c.theta0.real() != 0.0)
        violated("theta0.re", "the adiabatic deformation is theta0 = i tau");
    if (!(ad.tau > 0.0 && ad.tau < kPi / 4)) violated("adiabatic.tau", "need 0 < tau < pi/4");
    if (ad.eps_list.size() < 2) violated("adiabatic.eps_list", "needs at least two values for the slope");
    for (std::size_t i = 0; i < ad.eps_list.size(); ++i) {
        positive("adiabatic.eps_list", ad.eps_list[i]);
        if (i > 0 && !(ad.eps_list[i] < ad.eps_list[i - 1]))
            violated("adiabatic.eps_list", "must be strictly descending");
    }
    positive("adiabatic.t_final", ad.t_final);
    if (!(ad.drive_amplitude >= 0.0 && ad.drive_amplitude < 1.0))
        violated("adiabatic.drive.amplitude", "need 0 <= amplitude < 1 so that alpha(t) stays positive");
    positive("adiabatic.alpha0", ad.alpha0);
    if (!(ad.h > 0.0 && ad.h <= 1.0)) violated("adiabatic.h", "need 0 < h <= 1");
    if (ad.intervals < 2 || ad.intervals % 2 != 0) violated("adiabatic.intervals", "must be even and at least 2");
    if (ad.points_per_unit < 2) violated("adiabatic.points_per_unit", "must be at least 2");
    positive("adiabatic.pad", ad.pad);
}

// builds the objects the subcommand needs so that module preconditions fail before any computation
void check_buildable(const RunConfig& c)
{
    switch (c.cmd) {
    case Subcommand::Scatter:
    case Subcommand::Resonances: {
        const PotentialSpec spec = model_potential(c);
        if (c.cmd == Subcommand::Resonances) model_grid(c);
        if (c.model.lambda0) {
            try {
                SemiclassicalParams(c.model.h, c.model.c, c.model.lambda0).check_against(spec);
            } catch (const Error& e) {
                violated("model.lambda0", e.what());
            }
        }
        break;
    }
    case Subcommand::Evolve:
    case Subcommand::Compare: {
        std::vector<std::string> pots{c.scheme.potential};
        if (c.cmd == Subcommand::Compare) pots = c.compare.potentials;
        for (const auto& p : pots) scheme_config(c, p);
        break;
    }
    case Subcommand::Adiabatic:
        try {
            const Grid g = benchmark_grid(c.adiabatic.points_per_unit, c.adiabatic.pad);
            driven_delta_benchmark(c.adiabatic.alpha0, c.adiabatic.drive_amplitude, c.adiabatic.drive_kind)
                .check_on_grid(g);
        } catch (const Error& e) {
            violated("adiabatic.points_per_unit", e.what());
        }
        break;
    }
}

}  // namespace

Subcommand parse_subcommand(const std::string& name)
{
    const char* names[] = {"scatter", "resonances", "evolve", "compare", "adiabatic"};
    for (int i = 0; i < 5; ++i)
        if (name == names[i]) return static_cast<Subcommand>(i);
    throw Error(ErrorKind::ConstraintViolation, "unknown subcommand '" + name + "'");
}

const char* subcommand_name(Subcommand cmd)
{
    const char* names[] = {"scatter", "resonances", "evolve", "compare", "adiabatic"};
    return names[static_cast<int>(cmd)];
}

RunConfig parse_config(const std::string& text, Subcommand cmd)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorKind::TypeMismatch, std::string("config is not valid INI text: ") + e.what());
    }

    RunConfig c;
    c.cmd = cmd;
    for (const auto& k : registry()) c.values[k.name] = k.def;
    auto set = [&](const std::string& key, const std::string& value) {
        if (!find_key(key)) throw Error(ErrorKind::UnknownKey, "unknown config key '" + key + "'");
        if (c.explicit_keys.count(key)) violated(key, "given twice");
        c.values[key] = trim(value);
        c.explicit_keys.insert(key);
    };
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            set(name, node.data());
            continue;
        }
        for (const auto& [key, leaf] : node) set(name + "." + key, leaf.data());
    }
    fill_typed(c);
    check_buildable(c);
    return c;
}

RunConfig load_config(const std::string& path, Subcommand cmd)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::ConstraintViolation, "--config: cannot read '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), cmd);
}

std::string default_config_text(Subcommand cmd)
{
    std::ostringstream out;
    out << "; defaults for " << subcommand_name(cmd) << "\n";
    std::string section;
    for (const auto& k : registry()) {
        if (std::find(k.used_by.begin(), k.used_by.end(), cmd) == k.used_by.end()) continue;
        const auto dot = k.name.find('.');
        const std::string sec = k.name.substr(0, dot), key = k.name.substr(dot + 1);
        if (sec != section) {
            out << "\n[" << sec << "]\n";
            section = sec;
        }
        out << "; " << k.note << "\n";
        if (k.def.empty())
            out << "; " << key << " =\n";
        else
            out << key << " = " << k.def << "\n";
    }
    return out.str();
}

PotentialSpec model_potential(const RunConfig& cfg)
{
    const ModelBlock& m = cfg.model;
    std::vector<DeltaWell> deltas;
    for (const auto& d : m.deltas) deltas.push_back({d[0], d[1], {}});
    try {
        if (m.barrier_kind == "table") return table_barrier(m.a, m.b, m.xs, m.vs, m.c, deltas);
        return constant_barrier(m.a, m.b, m.v0, m.c, deltas);
    } catch (const Error& e) {
        violated(m.barrier_kind == "table" ? "barrier.vs" : "barrier.v0 / wells.delta", e.what());
    }
}

Grid model_grid(const RunConfig& cfg)
{
    const ModelBlock& m = cfg.model;
    const ResonanceBlock& r = cfg.resonances;
    try {
        const Grid g = build_grid(m.a - r.pad, m.b + r.pad, r.points_per_unit, m.a, m.b);
        model_potential(cfg).check_on_grid(g);
        return g;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConstraintViolation) throw;
        violated("resonances.points_per_unit", e.what());
    }
}

SchemeConfig scheme_config(const RunConfig& cfg, const std::string& potential)
{
    const SchemeBlock& s = cfg.scheme;
    SchemeConfig c;
    try {
        c.grid = scheme_grid(s.j, s.half_width);
    } catch (const Error& e) {
        violated("scheme.j / scheme.half_width", e.what());
    }
    c.dt = s.dt;
    c.n_steps = s.n_steps;
    c.theta0 = cfg.theta0;
    c.h_over_ell = s.h;
    c.tbc = s.tbc;
    c.snapshot_every = cfg.cmd == Subcommand::Compare ? 1 : s.snapshot_every;
    c.pad_to = s.pad_to;
    if (potential == "barrier") {
        try {
            c.potential = constant_barrier(-1, 1, s.v0, std::min(s.v0, 1.0 / s.v0));
        } catch (const Error& e) {
            violated("scheme.v0", e.what());
        }
    }
    return c;
}

}  // namespace reslab::app
