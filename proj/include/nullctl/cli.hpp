#pragma once

// Command-line front end: TOML experiment configs, subcommand dispatch,
// deterministic CSV output.

#include "nullctl/sets.hpp"
#include "nullctl/spectral_basis.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nullctl::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kInvalid = 2, kNumerical = 3 };

struct SmallnessConfig {
  int trials = 1000;
  double trig_fraction = 0.3;
  int max_degree = 12;
  int max_modes = 3;
  double points_per_unit_1d = 16384.0;
  double points_per_unit_2d = 128.0;
  int directions = 256;
};

struct SpectralConfig {
  sets::MeasurableSet1D omega;
  std::vector<double> mu;
  int modes = 0;  // 0: smallest J with w_J >= max mu
  spectral::DensitySpec density = spectral::DensitySpec::constant(1.0);
  std::string method = "automatic";
};

struct ControlConfig {
  sets::MeasurableSet1D omega;
  double T = 1.0;
  double mu0 = 0.0;
  int stages = 1;
  int modes = 16;
  std::string u0 = "random";
  int samples_per_phase = 4;
  bool cross_validate = false;
  int grid = 512;
  double dt = 1e-4;
  std::vector<double> snapshots;
  spectral::DensitySpec density = spectral::DensitySpec::constant(1.0);
};

struct SweepConfig {
  std::vector<sets::MeasurableSet1D> omegas;
  std::vector<std::uint64_t> seeds;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::optional<std::string> out;
  std::optional<SmallnessConfig> smallness;
  std::optional<SpectralConfig> spectral;
  std::optional<ControlConfig> control;
  std::optional<SweepConfig> sweep;
};

/// Parses a TOML document; throws ValidationError on syntax or schema errors.
ExperimentConfig parse_config(const std::string& toml_text, const std::string& source = "config");
ExperimentConfig load_config(const std::string& path);

/// "0.1:0.15,0.4:0.5" -> intervals in [0,1].
sets::MeasurableSet1D parse_omega(const std::string& text);

/// "8pi,12pi,30.5" -> reals; a trailing "pi" multiplies by pi.
std::vector<double> parse_real_list(const std::string& text);
double parse_real(const std::string& text);

/// Checks every constraint of the sections present; throws ValidationError.
void validate(const ExperimentConfig& config);

/// Full front end: argv without the program name. Output CSV goes to files
/// under --out when given, otherwise to `out`; summaries and errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nullctl::cli
