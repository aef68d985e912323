#include "rotq/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rotq/csvfmt.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rotq {

namespace {

constexpr double kPi = 3.14159265358979323846;

double deg2rad(double deg) { return deg * kPi / 180.0; }

// ---------------------------------------------------------------------------
// Operation registry
// ---------------------------------------------------------------------------

struct OpKindInfo {
    std::vector<std::string> required;
    std::vector<std::string> optional;
};

const std::map<std::string, OpKindInfo>& op_registry() {
    static const std::map<std::string, OpKindInfo> reg = {
        {"rotate", {{"theta_deg"}, {}}},
        {"propagate", {{"zeta_deg"}, {}}},
        {"displacement", {{"delta"}, {"theta_deg"}}},
        {"tilt", {{"alpha_w0"}, {"eta_deg"}}},
        {"combined", {{"delta", "alpha_w0"}, {"theta_deg", "eta_deg"}}},
        {"aperture", {{"radius"}, {"offset_x", "offset_y"}}},
        {"knife", {{"edge"}, {"orientation_deg"}}},
        {"phase_screen", {{}, {}}},
        {"elliptical", {{"ratio"}, {"orientation_deg"}}},
        {"efficiency_scalar", {{"value"}, {}}},
    };
    return reg;
}

bool op_param_allowed(const std::string& op, const std::string& param) {
    const OpKindInfo& info = op_registry().at(op);
    return std::find(info.required.begin(), info.required.end(), param) != info.required.end() ||
           std::find(info.optional.begin(), info.optional.end(), param) != info.optional.end();
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

using nlohmann::json;

double get_num(const json& j, const std::string& path, const std::string& key, double fallback,
               bool required = false) {
    if (!j.contains(key)) {
        if (required) throw ValidationError(path + "." + key + ": missing required field");
        return fallback;
    }
    if (!j[key].is_number())
        throw ValidationError(path + "." + key + ": expected a number");
    return j[key].get<double>();
}

ScenarioConfig parse_config_json(const json& root) {
    if (!root.is_object()) throw ValidationError("config: top-level JSON object expected");
    ScenarioConfig cfg;

    if (root.contains("basis")) {
        const json& jb = root["basis"];
        try {
            cfg.basis = make_basis(int(get_num(jb, "basis", "m_max", 5)),
                                   int(get_num(jb, "basis", "p_max", 8)),
                                   get_num(jb, "basis", "w0", 1.0), get_num(jb, "basis", "k", 7.9e3));
        } catch (const std::domain_error& e) {
            throw ValidationError(std::string("basis: ") + e.what());
        }
    }
    if (root.contains("grid")) {
        const json& jg = root["grid"];
        try {
            cfg.grid = make_grid(int(get_num(jg, "grid", "n_radial", 200)),
                                 int(get_num(jg, "grid", "n_azimuthal", 256)),
                                 get_num(jg, "grid", "r_max", 6.0));
        } catch (const std::domain_error& e) {
            throw ValidationError(std::string("grid: ") + e.what());
        }
    }

    if (root.contains("encoding")) {
        std::string e = root["encoding"].get<std::string>();
        if (e == "hybrid")
            cfg.encoding = Encoding::hybrid;
        else if (e == "polarization")
            cfg.encoding = Encoding::polarization;
        else if (e == "oam")
            cfg.encoding = Encoding::oam;
        else
            throw ValidationError("encoding: unknown value '" + e + "'");
    }
    if (root.contains("protocol")) {
        std::string p = root["protocol"].get<std::string>();
        if (p == "bb84")
            cfg.protocol = Protocol::bb84;
        else if (p == "mub_fidelity")
            cfg.protocol = Protocol::mub_fidelity;
        else if (p == "chsh")
            cfg.protocol = Protocol::chsh;
        else if (p == "tomography")
            cfg.protocol = Protocol::tomography;
        else if (p == "coeffs")
            cfg.protocol = Protocol::coeffs;
        else
            throw ValidationError("protocol: unknown value '" + p + "'");
    }

    cfg.theta_deg = get_num(root, "config", "theta_deg", 0.0);
    if (root.contains("theta_mix_deg")) {
        if (!root["theta_mix_deg"].is_array())
            throw ValidationError("theta_mix_deg: expected an array of angles");
        for (const auto& v : root["theta_mix_deg"]) cfg.theta_mix_deg.push_back(v.get<double>());
        if (cfg.theta_mix_deg.empty()) throw ValidationError("theta_mix_deg: must not be empty");
    }
    if (root.contains("output")) cfg.output = root["output"].get<std::string>();

    if (root.contains("channel")) {
        if (!root["channel"].is_array()) throw ValidationError("channel: expected an array");
        int idx = 0;
        for (const auto& jop : root["channel"]) {
            std::string path = "channel[" + std::to_string(idx) + "]";
            if (!jop.is_object() || !jop.contains("op"))
                throw ValidationError(path + ": expected an object with an 'op' field");
            OpConfig op;
            op.name = jop["op"].get<std::string>();
            if (!op_registry().count(op.name))
                throw ValidationError(path + ".op: unknown operation '" + op.name + "'");
            for (auto it = jop.begin(); it != jop.end(); ++it) {
                if (it.key() == "op") continue;
                if (it.key() == "terms") {
                    if (op.name != "phase_screen")
                        throw ValidationError(path + ".terms: only valid for phase_screen");
                    for (const auto& jt : it.value()) {
                        OpConfig::ScreenTerm t;
                        t.amp = get_num(jt, path + ".terms", "amp", 0.0, true);
                        t.harmonic = int(get_num(jt, path + ".terms", "harmonic", 0.0, true));
                        t.phase_deg = get_num(jt, path + ".terms", "phase_deg", 0.0);
                        t.radial_power = int(get_num(jt, path + ".terms", "radial_power", 0.0));
                        op.terms.push_back(t);
                    }
                    continue;
                }
                if (!op_param_allowed(op.name, it.key()))
                    throw ValidationError(path + "." + it.key() + ": not a parameter of '" +
                                          op.name + "'");
                if (!it.value().is_number())
                    throw ValidationError(path + "." + it.key() + ": expected a number");
                op.params[it.key()] = it.value().get<double>();
            }
            if (op.name == "phase_screen" && op.terms.empty())
                throw ValidationError(path + ": phase_screen requires a nonempty 'terms' array");
            cfg.channel.push_back(std::move(op));
            ++idx;
        }
    }

    if (root.contains("sweep")) {
        const json& js = root["sweep"];
        SweepSpec sw;
        if (!js.contains("variable")) throw ValidationError("sweep.variable: missing");
        sw.variable = js["variable"].get<std::string>();
        sw.start = get_num(js, "sweep", "start", 0.0, true);
        sw.stop = get_num(js, "sweep", "stop", 0.0, true);
        sw.step = get_num(js, "sweep", "step", 0.0, true);
        if (sw.step == 0.0 || (sw.stop - sw.start) * sw.step < 0.0)
            throw ValidationError("sweep.step: empty sweep range");
        cfg.sweep = sw;
    }

    // resolve the sweep binding now so misconfigurations fail before execution
    if (cfg.sweep) {
        const std::string& var = cfg.sweep->variable;
        if (var != "theta_deg") {
            if (var.rfind("channel[", 0) != 0)
                throw ValidationError("sweep.variable: expected 'theta_deg' or 'channel[i].<param>'");
            size_t close = var.find(']');
            size_t dot = var.find('.', close);
            if (close == std::string::npos || dot == std::string::npos)
                throw ValidationError("sweep.variable: malformed '" + var + "'");
            int idx = std::stoi(var.substr(8, close - 8));
            std::string param = var.substr(dot + 1);
            if (idx < 0 || idx >= int(cfg.channel.size()))
                throw ValidationError("sweep.variable: channel index " + std::to_string(idx) +
                                      " out of range");
            if (!op_param_allowed(cfg.channel[idx].name, param))
                throw ValidationError("sweep.variable: no parameter '" + param + "' in channel[" +
                                      std::to_string(idx) + "] (op '" + cfg.channel[idx].name + "')");
        }
    }

    // required parameters must be present or provided by the sweep
    for (size_t i = 0; i < cfg.channel.size(); ++i) {
        const OpConfig& op = cfg.channel[i];
        for (const std::string& req : op_registry().at(op.name).required) {
            bool swept = cfg.sweep &&
                         cfg.sweep->variable ==
                             "channel[" + std::to_string(i) + "]." + req;
            if (!op.params.count(req) && !swept)
                throw ValidationError("channel[" + std::to_string(i) + "]." + req +
                                      ": missing required parameter of '" + op.name + "'");
        }
    }

    if (!cfg.theta_mix_deg.empty() && cfg.protocol != Protocol::bb84 &&
        cfg.protocol != Protocol::chsh)
        throw ValidationError("theta_mix_deg: only supported for the bb84 and chsh protocols");

    return cfg;
}

std::vector<double> sweep_values(const ScenarioConfig& cfg) {
    if (!cfg.sweep) return {cfg.theta_deg};
    std::vector<double> out;
    const SweepSpec& sw = *cfg.sweep;
    double v = sw.start;
    int guard = 0;
    while ((sw.step > 0 ? v <= sw.stop + 1e-12 : v >= sw.stop - 1e-12) && guard++ < 100000) {
        out.push_back(v);
        v = sw.start + guard * sw.step;
    }
    if (out.empty()) throw ValidationError("sweep: empty range");
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline construction
// ---------------------------------------------------------------------------

PolarGrid scaled_grid(const PolarGrid& g, double scale) {
    if (scale == 1.0) return g;
    if (scale <= 0.0) throw ValidationError("grid-scale: must be positive");
    return make_grid(std::max(32, int(std::lround(g.n_radial * scale))),
                     std::max(64, int(std::lround(g.n_azimuthal * scale))), g.r_max);
}

struct BoundConfig {
    // channel with the sweep value substituted
    std::vector<OpConfig> ops;
    double theta_deg;
};

BoundConfig bind_point(const ScenarioConfig& cfg, double value) {
    BoundConfig bc{cfg.channel, cfg.theta_deg};
    if (!cfg.sweep) return bc;
    const std::string& var = cfg.sweep->variable;
    if (var == "theta_deg") {
        bc.theta_deg = value;
    } else {
        size_t close = var.find(']');
        int idx = std::stoi(var.substr(8, close - 8));
        std::string param = var.substr(var.find('.', close) + 1);
        bc.ops[idx].params[param] = value;
    }
    return bc;
}

double param_of(const OpConfig& op, const std::string& key, double fallback) {
    auto it = op.params.find(key);
    return it == op.params.end() ? fallback : it->second;
}

// Spatial ops map to coupling tensors; rotate has no coupling representation.
std::optional<ModeCoupling> op_coupling(const OpConfig& op, const BasisSpec& basis,
                                        const PolarGrid& grid) {
    if (op.name == "rotate") return std::nullopt;
    if (op.name == "propagate")
        return propagation_coupling(deg2rad(param_of(op, "zeta_deg", 0.0)), basis);
    if (op.name == "displacement")
        return displacement_coupling(param_of(op, "delta", 0.0),
                                     deg2rad(param_of(op, "theta_deg", 0.0)), basis, grid);
    if (op.name == "tilt" || op.name == "combined") {
        double aw = param_of(op, "alpha_w0", 0.0);
        if (aw < 0.0 || aw >= basis.k * basis.w0)
            throw ValidationError(op.name + ".alpha_w0: outside [0, k*w0)");
        double gamma = std::asin(aw / (basis.k * basis.w0));
        ModeCoupling tilt = mask_coupling(
            tilt_screen(gamma, deg2rad(param_of(op, "eta_deg", 0.0)), basis.k), basis, grid);
        if (op.name == "tilt") return tilt;
        ModeCoupling disp = displacement_coupling(
            param_of(op, "delta", 0.0), deg2rad(param_of(op, "theta_deg", 0.0)), basis, grid);
        return compose(tilt, disp);
    }
    if (op.name == "aperture")
        return mask_coupling(CircularAperture{param_of(op, "radius", 1.0),
                                              param_of(op, "offset_x", 0.0),
                                              param_of(op, "offset_y", 0.0)},
                             basis, grid);
    if (op.name == "knife")
        return mask_coupling(
            KnifeEdge{param_of(op, "edge", 0.0), deg2rad(param_of(op, "orientation_deg", 0.0))},
            basis, grid);
    if (op.name == "phase_screen") {
        auto terms = op.terms;
        double w0 = basis.w0;
        return mask_coupling(PhaseScreen{[terms, w0](double rho, double phi) {
                                 double v = 0.0;
                                 for (const auto& t : terms)
                                     v += t.amp * std::pow(rho / w0, t.radial_power) *
                                          std::cos(t.harmonic * phi - deg2rad(t.phase_deg));
                                 return v;
                             }},
                             basis, grid);
    }
    if (op.name == "elliptical")
        return mask_coupling(EllipticalScaling{param_of(op, "ratio", 1.0),
                                               deg2rad(param_of(op, "orientation_deg", 0.0))},
                             basis, grid);
    if (op.name == "efficiency_scalar")
        return efficiency_coupling(param_of(op, "value", 1.0), basis);
    throw ValidationError("channel: unknown operation '" + op.name + "'");
}

Pipeline build_pipeline(const std::vector<OpConfig>& ops, const BasisSpec& basis,
                        const PolarGrid& grid) {
    Pipeline pipe;
    for (const OpConfig& op : ops) {
        if (op.name == "rotate") {
            double th = deg2rad(param_of(op, "theta_deg", 0.0));
            pipe.ops.push_back([th](const SpinOrbitState& s) { return rotate_frame(s, th); });
        } else if (op.name == "propagate") {
            double z = deg2rad(param_of(op, "zeta_deg", 0.0));
            pipe.ops.push_back([z](const SpinOrbitState& s) { return free_propagate(s, z); });
        } else {
            ModeCoupling c = *op_coupling(op, basis, grid);
            pipe.ops.push_back(
                [c = std::move(c)](const SpinOrbitState& s) { return apply_coupling(s, c); });
        }
    }
    return pipe;
}

SpinOrbitState transmittivity_probe(const SimContext& ctx, Encoding enc) {
    if (enc == Encoding::hybrid) return encode(logical_amplitudes(LogicalState::Plus), ctx.qplate);
    if (enc == Encoding::polarization) {
        double inv = 1.0 / std::sqrt(2.0);
        return fundamental_state(PolarizationQubit{inv, inv}, ctx.basis);
    }
    SpinOrbitState s(ctx.basis);
    double q = 0.5;  // |+>_oam on horizontal polarization
    s.at(Pol::R, -1, 0) = q;
    s.at(Pol::L, -1, 0) = q;
    s.at(Pol::R, +1, 0) = q;
    s.at(Pol::L, +1, 0) = q;
    return s;
}

// ---------------------------------------------------------------------------
// Protocol execution per sweep point
// ---------------------------------------------------------------------------

std::vector<std::string> protocol_header(Protocol p) {
    switch (p) {
        case Protocol::bb84:
            return {"value",        "fidelity_0", "fidelity_1", "fidelity_plus",
                    "fidelity_minus", "avg_fidelity", "qber_z",     "qber_x",
                    "key_fraction", "secure",     "survival",   "transmittivity"};
        case Protocol::mub_fidelity:
            return {"value", "fidelity", "survival", "transmittivity"};
        case Protocol::chsh:
            return {"value", "S", "survival", "transmittivity"};
        case Protocol::tomography:
            return {"value", "fidelity_phi_minus", "concurrence", "survival", "transmittivity"};
        default:
            throw ValidationError("protocol: coeffs has no sweep table; use the coeffs command");
    }
}

std::vector<double> run_point(const ScenarioConfig& cfg, const SimContext& ctx, double value,
                              const PolarGrid& grid) {
    BoundConfig bc = bind_point(cfg, value);
    Pipeline pipe = build_pipeline(bc.ops, ctx.basis, grid);
    double theta = deg2rad(bc.theta_deg);

    SpinOrbitState probe = transmittivity_probe(ctx, cfg.encoding);
    double transmit = pipe.apply(probe).norm2() / probe.norm2();

    std::vector<double> thetas_mix;
    for (double d : cfg.theta_mix_deg) thetas_mix.push_back(deg2rad(d));

    switch (cfg.protocol) {
        case Protocol::bb84: {
            Bb84Report rep = thetas_mix.empty()
                                 ? bb84_run(ctx, pipe, theta, cfg.encoding)
                                 : bb84_run_mixed(ctx, pipe, thetas_mix, cfg.encoding);
            double surv = 0.25 * (rep.survival[0] + rep.survival[1] + rep.survival[2] +
                                  rep.survival[3]);
            return {value,        rep.fidelity[0], rep.fidelity[1], rep.fidelity[2],
                    rep.fidelity[3], rep.avg_fidelity, rep.qber_z,      rep.qber_x,
                    rep.key_fraction, rep.secure ? 1.0 : 0.0, surv,     transmit};
        }
        case Protocol::mub_fidelity: {
            MubReport rep = mub_report(ctx, pipe, theta, cfg.encoding);
            return {value, rep.fidelity, rep.mean_survival, transmit};
        }
        case Protocol::chsh: {
            if (cfg.encoding == Encoding::oam)
                throw ValidationError("protocol chsh: oam encoding not supported");
            TwoPhotonPureState bell = cfg.encoding == Encoding::hybrid
                                          ? bell_state_logical(ctx)
                                          : bell_state_polarization(ctx);
            Pipeline identity;
            TwoQubitDensityMatrix rho;
            double survival = 0.0;
            if (thetas_mix.empty()) {
                TwoQubitOutcome o = apply_local(ctx, bell, pipe, identity, theta, 0.0, cfg.encoding);
                if (!o.defined) throw std::runtime_error("chsh: zero joint survival");
                rho = o.rho;
                survival = o.survival;
            } else {
                double wsum = 0.0;
                for (double th : thetas_mix) {
                    TwoQubitOutcome o = apply_local(ctx, bell, pipe, identity, th, 0.0, cfg.encoding);
                    if (!o.defined) continue;
                    for (int i = 0; i < 4; ++i)
                        for (int j = 0; j < 4; ++j) rho.rho(i, j) += o.survival * o.rho.rho(i, j);
                    wsum += o.survival;
                    survival += o.survival / thetas_mix.size();
                }
                if (wsum < 1e-12) throw std::runtime_error("chsh: zero joint survival");
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j) rho.rho(i, j) /= wsum;
            }
            return {value, chsh_S(rho), survival, transmit};
        }
        case Protocol::tomography: {
            if (cfg.encoding == Encoding::oam)
                throw ValidationError("protocol tomography: oam encoding not supported");
            TwoPhotonPureState bell = cfg.encoding == Encoding::hybrid
                                          ? bell_state_logical(ctx)
                                          : bell_state_polarization(ctx);
            Pipeline identity;
            TwoQubitOutcome o = apply_local(ctx, bell, pipe, identity, theta, 0.0, cfg.encoding);
            if (!o.defined) throw std::runtime_error("tomography: zero joint survival");
            TwoQubitDensityMatrix rec = tomography_reconstruct(tomography_probs(o.rho));
            return {value, density_fidelity(rec, phi_minus_matrix()), concurrence(rec), o.survival,
                    transmit};
        }
        default:
            throw ValidationError("protocol: coeffs has no sweep table; use the coeffs command");
    }
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: JSON parse error: ") + e.what());
    }
    return parse_config_json(root);
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

SweepTable run_scenario(const ScenarioConfig& cfg, int threads, double grid_scale) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
    PolarGrid grid = scaled_grid(cfg.grid, grid_scale);
    SimContext ctx = make_context(cfg.basis, grid);

    std::vector<double> values = sweep_values(cfg);
    SweepTable table;
    table.header = protocol_header(cfg.protocol);
    table.rows.assign(values.size(), {});

    std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < int(values.size()); ++i) {
        try {
            table.rows[i] = run_point(cfg, ctx, values[i], grid);
        } catch (...) {
#pragma omp critical
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) {
        try {
            std::rethrow_exception(first_error);
        } catch (const convergence_error& e) {
            throw convergence_error(std::string("run_scenario: ") + e.what(), e.previous_estimate,
                                    e.last_estimate);
        }
    }
    return table;
}

void emit_csv(const SweepTable& table, std::ostream& os) {
    for (size_t i = 0; i < table.header.size(); ++i)
        os << table.header[i] << (i + 1 < table.header.size() ? "," : "");
    os << '\n';
    for (const auto& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i)
            os << fmt_sig12(row[i]) << (i + 1 < row.size() ? "," : "");
        os << '\n';
    }
}

void emit_csv(const SweepTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");
    emit_csv(table, out);
    if (!out) throw std::runtime_error("emit_csv: write failed for '" + path + "'");
}

ModeCoupling pipeline_coupling(const ScenarioConfig& cfg, double grid_scale) {
    PolarGrid grid = scaled_grid(cfg.grid, grid_scale);
    ModeCoupling total = identity_coupling(cfg.basis);
    for (size_t i = 0; i < cfg.channel.size(); ++i) {
        std::optional<ModeCoupling> c = op_coupling(cfg.channel[i], cfg.basis, grid);
        if (!c)
            throw ValidationError("channel[" + std::to_string(i) + "]: '" + cfg.channel[i].name +
                                  "' is not a spatial coupling; classification applies to the "
                                  "transmission channel only");
        total = compose(*c, total);
    }
    return total;
}

ClassifyReport classify_channel(const ScenarioConfig& cfg, double grid_scale) {
    ModeCoupling total = pipeline_coupling(cfg, grid_scale);
    InvarianceReport inv = check_invariance(total, 1e-9);

    PolarGrid grid = scaled_grid(cfg.grid, grid_scale);
    SimContext ctx = make_context(cfg.basis, grid);

    // projected logical map: diag(c_minus, c_plus)
    cplx c_minus = 0.0, c_plus = 0.0;
    for (int p = 0; p <= cfg.basis.p_max; ++p)
        for (int p2 = 0; p2 <= cfg.basis.p_max; ++p2) {
            double qin = ctx.qplate.q(0, 1, 0, p);
            double qout = ctx.qplate.q(1, 0, p2, 0);
            c_minus += qin * total.entry(-1, -1, p, p2) * qout;
            c_plus += qin * total.entry(+1, +1, p, p2) * qout;
        }
    double denom = 2.0 * (std::norm(c_minus) + std::norm(c_plus));
    double f = denom < 1e-30 ? 1.0 : std::norm(c_minus + c_plus) / denom;

    ClassifyReport rep;
    rep.holds = inv.holds;
    rep.max_dev = inv.max_dev;
    rep.predicted_fidelity = (2.0 + 4.0 * f) / 6.0;

    Pipeline pipe = build_pipeline(cfg.channel, cfg.basis, grid);
    rep.direct_fidelity = mub_average_fidelity(ctx, pipe, deg2rad(cfg.theta_deg), Encoding::hybrid);
    return rep;
}

std::vector<std::string> list_presets(const std::string& dir) {
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

std::string preset_path(const std::string& dir, const std::string& name) {
    std::string file = name;
    if (file.size() < 5 || file.substr(file.size() - 5) != ".json") file += ".json";
    return dir + "/" + file;
}

}  // namespace rotq
