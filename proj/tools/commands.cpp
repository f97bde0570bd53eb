#include "app.hpp"

#include "reslab/error.hpp"
#include "reslab/krein.hpp"
#include "reslab/scattering.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace reslab::app {

namespace fs = std::filesystem;

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void CsvTable::add(const std::vector<double>& row)
{
    std::vector<std::string> r;
    for (double v : row) r.push_back(format_double(v));
    add_text(std::move(r));
}

void CsvTable::add_text(std::vector<std::string> row)
{
    if (row.size() != header.size())
        throw Error(ErrorKind::ShapeMismatch, "CSV row has " + std::to_string(row.size()) + " fields, header has " +
                                                  std::to_string(header.size()));
    rows.push_back(std::move(row));
}

namespace {

std::string quote(const std::string& field)
{
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

void append_line(std::string& out, const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += quote(fields[i]);
    }
    out += '\n';
}

}  // namespace

std::string csv_text(const CsvTable& table)
{
    std::string out;
    append_line(out, table.header);
    for (const auto& r : table.rows) append_line(out, r);
    return out;
}

void emit_csv(const CsvTable& table, const std::string& path)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
    const std::string text = csv_text(table);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
}

namespace {

using nlohmann::ordered_json;

struct Output {
    const RunConfig& cfg;
    std::vector<std::string> files;
    ordered_json summary;

    void write(const std::string& name, const CsvTable& t)
    {
        emit_csv(t, (fs::path(cfg.output_dir) / name).string());
        files.push_back(name);
    }
};

void run_scatter(Output& out)
{
    const RunConfig& c = out.cfg;
    const InterfaceParams ip(c.theta0, c.model.h);
    CsvTable t{{"k", "re_A", "im_A", "re_B", "im_B", "re_T", "im_T", "re_R", "im_R", "abs_d"}, {}};
    const ScatterBlock& s = c.scatter;
    for (int i = 0; i < s.k_count; ++i) {
        const double k = s.k_count == 1 ? s.k_min : s.k_min + (s.k_max - s.k_min) * i / (s.k_count - 1);
        const ScatteringCoeffs sc = free_coeffs(k, ip, c.model.a, c.model.b);
        t.add({k, sc.a_coef.real(), sc.a_coef.imag(), sc.b_coef.real(), sc.b_coef.imag(), sc.t_coef.real(),
               sc.t_coef.imag(), sc.r_coef.real(), sc.r_coef.imag(), std::abs(sc.d)});
    }
    out.write("scatter.csv", t);
}

void run_resonances(Output& out)
{
    const RunConfig& c = out.cfg;
    const PotentialSpec spec = model_potential(c);
    const Grid g = model_grid(c);
    const ResonanceBlock& r = c.resonances;
    const double lo = r.lo.value_or(spec.c()), hi = r.hi.value_or(spec.inf_barrier() - spec.c());
    ResonanceOptions opts;
    opts.n0 = r.n0;
    opts.xi = r.xi;
    opts.lambda0 = c.model.lambda0;
    opts.with_fgr = r.fgr;
    std::vector<double> hs = r.h_list.empty() ? std::vector<double>{c.model.h} : r.h_list;
    CsvTable t{{"h", "Im(theta0)", "j", "lambda_j", "Re(z)", "Im(z)", "gamma", "fgr", "fgr_over_gamma",
                "newton_residual"},
               {}};
    int count = 0;
    for (double h : hs) {
        const ResonanceSearch rs = find_resonances(spec, InterfaceParams(c.theta0, h), g, lo, hi, opts);
        for (const auto& rec : rs.records) {
            const double ratio = r.fgr ? rec.fgr / rec.gamma : std::nan("");
            t.add({h, c.theta0.imag(), static_cast<double>(rec.j), rec.lambda_j, rec.z_res.real(), rec.z_res.imag(),
                   rec.gamma, r.fgr ? rec.fgr : std::nan(""), ratio, rec.newton_residual});
            ++count;
        }
    }
    out.summary["resonances"] = count;
    out.write("resonances.csv", t);
}

double packet_momentum(const RunConfig& c, const Grid& g) { return c.packet.k.value_or(2 * kPi / (8 * g.dx)); }

void run_evolve(Output& out)
{
    const RunConfig& c = out.cfg;
    const SchemeConfig sc = scheme_config(c, c.scheme.potential);
    const Grid& g = sc.grid;
    const CVec u0 = WavePacket(c.packet.x0[0], c.packet.sigma, packet_momentum(c, g)).sample(g);
    const WaveTrajectory tr = evolve(sc, u0);
    CsvTable t{{"step", "x", "re_u", "im_u", "abs_u"}, {}};
    for (std::size_t s = 0; s < tr.snapshots.size(); ++s)
        for (int j = 0; j < g.n_points; ++j) {
            const cplx u = tr.snapshots[s](j);
            t.add({static_cast<double>(tr.steps[s]), g.x(j), u.real(), u.imag(), std::abs(u)});
        }
    out.write("evolve.csv", t);
    CsvTable n{{"step", "norm"}, {}};
    for (std::size_t s = 0; s < tr.norms.size(); ++s) n.add({static_cast<double>(s), tr.norms[s]});
    out.write("evolve_norms.csv", n);
    out.summary["warnings"] = tr.warnings;
}

void run_compare(Output& out)
{
    const RunConfig& c = out.cfg;
    ordered_json cases = ordered_json::array();
    for (const std::string& pot : c.compare.potentials) {
        const SchemeConfig sc = scheme_config(c, pot);
        for (double x0 : c.packet.x0) {
            const WavePacket packet(x0, c.packet.sigma, packet_momentum(c, sc.grid));
            const std::vector<ComparePoint> pts = theta0_sweep(sc, packet, c.compare.im_list);
            CsvTable t{{"im_theta0", "D"}, {}};
            for (const auto& p : pts) t.add({p.im_theta0, p.d});
            char name[96];
            std::snprintf(name, sizeof name, "compare_%s_x0_%g.csv", pot.c_str(), x0);
            out.write(name, t);
            cases.push_back({{"potential", pot}, {"x0", x0}, {"file", name}});
        }
    }
    out.summary["cases"] = cases;
}

void run_adiabatic(Output& out)
{
    const RunConfig& c = out.cfg;
    const AdiabaticBlock& a = c.adiabatic;
    const PotentialSpec spec = driven_delta_benchmark(a.alpha0, a.drive_amplitude, a.drive_kind);
    const Grid g = benchmark_grid(a.points_per_unit, a.pad);
    const SemiclassicalParams params(a.h, 0.2);
    AdiabaticOptions opts;
    opts.path.tau = a.tau;
    opts.path.t0 = 0.0;
    opts.path.t1 = a.t_final;
    opts.path.intervals = a.intervals;
    opts.path.lambda0 = a.lambda0;
    opts.path.seed = c.seed;
    opts.eps_values = a.eps_list;
    const AdiabaticReport rep = adiabatic_error_curve(spec, params, g, opts);
    CsvTable t{{"eps", "max_error", "final_error", "slope"}, {}};
    for (std::size_t i = 0; i < rep.eps_values.size(); ++i)
        t.add({rep.eps_values[i], rep.errors[i], rep.final_errors[i], rep.fitted_slope});
    out.write("adiabatic.csv", t);
    out.summary["fitted_slope"] = rep.fitted_slope;
    out.summary["intertwining"] = rep.intertwining;
    out.summary["idempotence"] = rep.idempotence;
    out.summary["max_jump"] = rep.max_jump;
}

ordered_json config_json(const RunConfig& cfg)
{
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : cfg.values) j[k] = v;
    return j;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

void prepare_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::IoError, "--out: cannot create directory '" + dir + "'");
}

}  // namespace

std::vector<std::string> run(const RunConfig& cfg)
{
    prepare_dir(cfg.output_dir);
    Output out{cfg, {}, ordered_json::object()};
    out.summary["subcommand"] = subcommand_name(cfg.cmd);
    switch (cfg.cmd) {
    case Subcommand::Scatter: run_scatter(out); break;
    case Subcommand::Resonances: run_resonances(out); break;
    case Subcommand::Evolve: run_evolve(out); break;
    case Subcommand::Compare: run_compare(out); break;
    case Subcommand::Adiabatic: run_adiabatic(out); break;
    }
    out.summary["files"] = out.files;
    out.summary["config"] = config_json(cfg);
    write_text(fs::path(cfg.output_dir) / "summary.json", out.summary.dump(2) + "\n");
    out.files.push_back("summary.json");
    return out.files;
}

int cli_main(int argc, char** argv)
{
    CLI::App cli{"resonance laboratory for 1D Schroedinger operators with complex interface conditions"};
    cli.require_subcommand(1);
    std::string config_path, out_dir = ".";
    bool print_defaults = false;
    for (const char* name : {"scatter", "resonances", "evolve", "compare", "adiabatic"}) {
        CLI::App* sub = cli.add_subcommand(name);
        sub->add_option("--config", config_path, "INI config file (missing keys take their defaults)");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_flag("--print-defaults", print_defaults, "print the default config and exit");
    }
    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : 2;
    }
    const Subcommand cmd = parse_subcommand(cli.get_subcommands().front()->get_name());
    if (print_defaults) {
        std::cout << default_config_text(cmd);
        return 0;
    }

    RunConfig cfg;
    try {
        cfg = config_path.empty() ? parse_config("", cmd) : load_config(config_path, cmd);
        cfg.output_dir = out_dir;
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    try {
        const auto files = run(cfg);
        for (const auto& f : files) std::cout << (fs::path(cfg.output_dir) / f).string() << "\n";
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (e.is_config_error()) return 2;
        try {
            prepare_dir(cfg.output_dir);
            CsvTable t{{"key", "value"}, {}};
            t.add_text({"subcommand", subcommand_name(cmd)});
            t.add_text({"error_kind", kind_name(e.kind())});
            t.add_text({"message", e.what()});
            for (const auto& [k, v] : cfg.values) t.add_text({k, v});
            emit_csv(t, (fs::path(cfg.output_dir) / "failure.csv").string());
        } catch (const Error& io) {
            std::cerr << "could not write failure.csv: " << io.what() << "\n";
        }
        return 3;
    }
}

}  // namespace reslab::app
