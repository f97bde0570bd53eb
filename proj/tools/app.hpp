#pragma once

#include "reslab/adiabatic.hpp"
#include "reslab/model.hpp"
#include "reslab/propagator.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace reslab::app {

enum class Subcommand { Scatter, Resonances, Evolve, Compare, Adiabatic };

Subcommand parse_subcommand(const std::string& name);
const char* subcommand_name(Subcommand cmd);

struct ModelBlock {
    double a = 0.0, b = 1.0, c = 0.2, h = 0.1;
    std::optional<double> lambda0;
    std::string barrier_kind = "constant";
    double v0 = 1.0;
    std::vector<double> xs, vs;
    std::vector<std::array<double, 2>> deltas;  // (position, alpha)
};

struct ScatterBlock {
    double k_min = 0.05, k_max = 3.0;
    int k_count = 200;
};

struct ResonanceBlock {
    std::vector<double> h_list;  // empty means model.h
    std::optional<double> lo, hi;
    int n0 = 2;
    double xi = 1.0;
    bool fgr = true;
    int points_per_unit = 4000;
    double pad = 0.0;
};

struct SchemeBlock {
    int j = 30;
    double half_width = 5.0;
    double dt = 0.8;
    int n_steps = 400;
    TbcMode tbc = TbcMode::Exact;
    double h = 0.03;
    std::string potential = "none";
    double v0 = 0.8;
    int snapshot_every = 10;
    double pad_to = 40.0;
};

struct PacketBlock {
    std::vector<double> x0{-3.0};
    double sigma = 0.2;
    std::optional<double> k;  // default 2 pi / (8 dx)
};

struct CompareBlock {
    std::vector<double> im_list{0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09};
    std::vector<std::string> potentials{"none"};
};

struct AdiabaticBlock {
    double tau = 0.3;
    std::vector<double> eps_list{1e-2, 3e-3, 1e-3};
    double t_final = 1.0;
    DriveKind drive_kind = DriveKind::Sine;
    double drive_amplitude = 0.2;
    double alpha0 = 1.0;
    double h = 0.05;
    int intervals = 200;
    double lambda0 = 0.75;
    int points_per_unit = 200;
    double pad = 3.0;
};

struct RunConfig {
    Subcommand cmd = Subcommand::Scatter;
    std::string output_dir = ".";
    std::uint64_t seed = 7;
    ModelBlock model;
    cplx theta0 = 0.0;
    ScatterBlock scatter;
    ResonanceBlock resonances;
    SchemeBlock scheme;
    PacketBlock packet;
    CompareBlock compare;
    AdiabaticBlock adiabatic;

    std::map<std::string, std::string> values;  // every key with its effective text
    std::set<std::string> explicit_keys;
};

// INI text with [sections]; keys may also be written flat as section.key at the top
RunConfig parse_config(const std::string& text, Subcommand cmd);
RunConfig load_config(const std::string& path, Subcommand cmd);

// commented INI listing every key with its default
std::string default_config_text(Subcommand cmd);

// objects built from a validated config; construction errors come back as ConstraintViolation
PotentialSpec model_potential(const RunConfig& cfg);
Grid model_grid(const RunConfig& cfg);
SchemeConfig scheme_config(const RunConfig& cfg, const std::string& potential);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(const std::vector<double>& row);
    void add_text(std::vector<std::string> row);
};

std::string format_double(double v);
std::string csv_text(const CsvTable& table);
void emit_csv(const CsvTable& table, const std::string& path);

// runs the subcommand and writes its files into cfg.output_dir; returns the files written
std::vector<std::string> run(const RunConfig& cfg);

// full command line entry point: 0 success, 2 configuration error, 3 numerical failure
int cli_main(int argc, char** argv);

}  // namespace reslab::app
