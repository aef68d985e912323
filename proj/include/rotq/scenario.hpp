#ifndef ROTQ_SCENARIO_HPP
#define ROTQ_SCENARIO_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rotq/protocols.hpp"

namespace rotq {

// Configuration problems carry the offending field path in the message.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

enum class Protocol { bb84, mub_fidelity, chsh, tomography, coeffs };

// One named channel stage. Registry: rotate, propagate, displacement, tilt,
// combined, aperture, knife, phase_screen, elliptical, efficiency_scalar.
// All angles are degrees here; lengths share the unit of w0.
struct OpConfig {
    struct ScreenTerm {
        double amp = 0.0;
        int harmonic = 0;
        double phase_deg = 0.0;
        int radial_power = 0;
    };
    std::string name;
    std::map<std::string, double> params;
    std::vector<ScreenTerm> terms;  // phase_screen only
};

struct SweepSpec {
    std::string variable;  // "theta_deg" or "channel[i].<param>"
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;
};

struct ScenarioConfig {
    BasisSpec basis{};
    PolarGrid grid{};
    Encoding encoding = Encoding::hybrid;
    Protocol protocol = Protocol::bb84;
    std::vector<OpConfig> channel;
    std::optional<SweepSpec> sweep;
    double theta_deg = 0.0;
    std::vector<double> theta_mix_deg;  // nonempty: mixed-angle session statistics
    std::string output = "sweep.csv";
};

ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);

struct SweepTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

// Runs the configured protocol over the sweep (or a single point when no
// sweep is given). Deterministic: identical configs produce identical tables,
// regardless of the worker count.
SweepTable run_scenario(const ScenarioConfig& cfg, int threads = 0, double grid_scale = 1.0);

// RFC-4180-style CSV: header row, 12 significant digits, LF line endings.
void emit_csv(const SweepTable& table, std::ostream& os);
void emit_csv(const SweepTable& table, const std::string& path);

// The composed coupling tensor of the (spatial-only) pipeline.
ModeCoupling pipeline_coupling(const ScenarioConfig& cfg, double grid_scale = 1.0);

struct ClassifyReport {
    bool holds = false;
    double max_dev = 0.0;
    double predicted_fidelity = 1.0;  // from the projected logical map
    double direct_fidelity = 1.0;     // six-state MUB average through the pipeline
};

// Invariance-condition classifier for transmission channels (no frame
// rotations, no q-plates) with a direct fidelity cross-check.
ClassifyReport classify_channel(const ScenarioConfig& cfg, double grid_scale = 1.0);

// Preset configs are plain files shipped under presets/.
std::vector<std::string> list_presets(const std::string& dir);
std::string preset_path(const std::string& dir, const std::string& name);

}  // namespace rotq

#endif
