#include "cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace qbath::cli {

using json = nlohmann::json;

namespace {

// Character pointer that reports how far the lexer has read.
struct TrackingIterator {
    using iterator_category = std::input_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    const char* p{nullptr};
    const char** cursor{nullptr};

    reference operator*() const { return *p; }
    TrackingIterator& operator++() {
        ++p;
        if (cursor) *cursor = p;
        return *this;
    }
    TrackingIterator operator++(int) {
        TrackingIterator old = *this;
        ++*this;
        return old;
    }
    bool operator==(const TrackingIterator& other) const { return p == other.p; }
};

class LineCounter {
public:
    explicit LineCounter(std::string_view text) : text_(text) {}
    std::size_t at(std::size_t offset) {
        offset = std::min(offset, text_.size());
        if (offset < offset_) {
            offset_ = 0;
            line_ = 1;
        }
        line_ += static_cast<std::size_t>(std::count(text_.begin() + static_cast<std::ptrdiff_t>(offset_),
                                                     text_.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
        offset_ = offset;
        return line_;
    }

private:
    std::string_view text_;
    std::size_t offset_{0};
    std::size_t line_{1};
};

// DOM builder that also records the line of every object key, keyed by JSON pointer.
class KeyLineSax : public nlohmann::detail::json_sax_dom_parser<json> {
    using base = nlohmann::detail::json_sax_dom_parser<json>;

public:
    KeyLineSax(json& root, std::string_view text, const char* const& cursor)
        : base(root), begin_(text.data()), cursor_(cursor), lines_(text) {}

    bool start_object(std::size_t n) {
        scopes_.push_back(pending_);
        return base::start_object(n);
    }
    bool end_object() {
        scopes_.pop_back();
        pending_ = scopes_.empty() ? std::string() : scopes_.back();
        return base::end_object();
    }
    bool start_array(std::size_t n) {
        scopes_.push_back(pending_);
        return base::start_array(n);
    }
    bool end_array() {
        scopes_.pop_back();
        pending_ = scopes_.empty() ? std::string() : scopes_.back();
        return base::end_array();
    }
    bool key(string_t& k) {
        pending_ = scopes_.back() + "/" + k;
        keys.emplace_back(pending_, lines_.at(static_cast<std::size_t>(cursor_ - begin_)));
        return base::key(k);
    }

    std::vector<std::pair<std::string, std::size_t>> keys;

private:
    const char* begin_;
    const char* const& cursor_;
    LineCounter lines_;
    std::vector<std::string> scopes_;
    std::string pending_;
};

// Typed access to one JSON object with unknown-key rejection.
class Section {
public:
    Section(const RunConfig& cfg, const json& j, std::string path) : cfg_(cfg), j_(j), path_(std::move(path)) {
        if (!j_.is_object()) cfg_.fail(path_, "'" + name() + "' must be an object");
    }

    void allow(std::initializer_list<std::string_view> keys) const {
        for (const auto& [k, v] : j_.items()) {
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
                cfg_.fail(path_ + "/" + k, "unknown key '" + k + "' in '" + name() + "'");
            }
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string at(const std::string& key) const { return path_ + "/" + key; }

    Section child(const std::string& key) const {
        if (!has(key)) cfg_.fail(path_, "missing section '" + key + "' in '" + name() + "'");
        return Section(cfg_, j_.at(key), at(key));
    }

    double number(const std::string& key) const {
        if (!has(key)) cfg_.fail(path_, "missing key '" + key + "' in '" + name() + "'");
        const json& v = j_.at(key);
        if (!v.is_number()) cfg_.fail(at(key), "'" + key + "' must be a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) cfg_.fail(at(key), "'" + key + "' must be finite");
        return x;
    }
    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    std::uint64_t unsigned_integer(const std::string& key) const {
        const json& v = j_.at(key);
        if (!v.is_number_unsigned()) cfg_.fail(at(key), "'" + key + "' must be a non-negative integer");
        return v.get<std::uint64_t>();
    }
    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
        return has(key) ? unsigned_integer(key) : fallback;
    }

    std::string string(const std::string& key) const {
        if (!has(key)) cfg_.fail(path_, "missing key '" + key + "' in '" + name() + "'");
        const json& v = j_.at(key);
        if (!v.is_string()) cfg_.fail(at(key), "'" + key + "' must be a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key) const {
        const json& v = j_.at(key);
        if (!v.is_array()) cfg_.fail(at(key), "'" + key + "' must be an array of numbers");
        std::vector<double> out;
        for (const json& e : v) {
            if (!e.is_number()) cfg_.fail(at(key), "'" + key + "' must contain only numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<std::uint64_t> unsigned_integers(const std::string& key) const {
        const json& v = j_.at(key);
        if (!v.is_array()) cfg_.fail(at(key), "'" + key + "' must be an array of non-negative integers");
        std::vector<std::uint64_t> out;
        for (const json& e : v) {
            if (!e.is_number_unsigned()) cfg_.fail(at(key), "'" + key + "' must contain only non-negative integers");
            out.push_back(e.get<std::uint64_t>());
        }
        return out;
    }

    std::vector<std::string> strings(const std::string& key) const {
        const json& v = j_.at(key);
        if (!v.is_array()) cfg_.fail(at(key), "'" + key + "' must be an array of strings");
        std::vector<std::string> out;
        for (const json& e : v) {
            if (!e.is_string()) cfg_.fail(at(key), "'" + key + "' must contain only strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    // Positive inverse temperature, or "inf" for the zero-temperature bath.
    double beta(const std::string& key) const {
        const json& v = j_.at(key);
        if (v.is_string() && v.get<std::string>() == "inf") return zero_temperature;
        if (!v.is_number()) cfg_.fail(at(key), "'" + key + "' must be a positive number or \"inf\"");
        const double b = v.get<double>();
        if (!(b > 0.0)) cfg_.fail(at(key), "'" + key + "' must be positive");
        return b;
    }

    template <class Enum>
    Enum choice(const std::string& key, std::initializer_list<std::pair<std::string_view, Enum>> options) const {
        const std::string value = string(key);
        for (const auto& [name, e] : options) {
            if (name == value) return e;
        }
        std::string allowed;
        for (const auto& [name, e] : options) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
        cfg_.fail(at(key), "'" + key + "' must be one of {" + allowed + "}, got '" + value + "'");
    }

private:
    std::string name() const { return path_.empty() ? std::string("<root>") : path_.substr(1); }

    const RunConfig& cfg_;
    const json& j_;
    std::string path_;
};

Eigen::VectorXcd complex_array(const Section& s, const std::string& re, const std::string& im, std::size_t n) {
    const std::vector<double> r = s.has(re) ? s.numbers(re) : std::vector<double>(n, 0.0);
    const std::vector<double> i = s.has(im) ? s.numbers(im) : std::vector<double>(n, 0.0);
    Eigen::VectorXcd out(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) out(static_cast<Eigen::Index>(k)) = cplx(r[k], i[k]);
    return out;
}

void parse_model(RunConfig& cfg, const Section& m) {
    m.allow({"nu", "coupling_family", "spectral", "units", "explicit"});
    cfg.nu = m.number("nu");
    cfg.coupling_family = m.choice<CouplingFamily>(
        "coupling_family",
        {{"rwa", CouplingFamily::RWA}, {"position_position", CouplingFamily::PositionPosition}, {"custom", CouplingFamily::Custom}});
    if (m.has("units")) {
        const Section u = m.child("units");
        u.allow({"hbar", "mass"});
        cfg.units.hbar = u.number("hbar", 1.0);
        cfg.units.mass = u.number("mass", 1.0);
        if (!(cfg.units.hbar > 0.0)) cfg.fail(u.at("hbar"), "'hbar' must be positive");
        if (!(cfg.units.mass > 0.0)) cfg.fail(u.at("mass"), "'mass' must be positive");
    }

    if (m.has("spectral") == m.has("explicit")) {
        cfg.fail("/model", "'model' needs exactly one of 'spectral' or 'explicit'");
    }
    SpectralDiscretization& disc = cfg.spectral;
    if (m.has("spectral")) {
        const Section s = m.child("spectral");
        s.allow({"family", "strength", "cutoff", "omega_min", "omega_max", "N"});
        disc.family = s.choice<SpectralFamily>(
            "family", {{"ohmic", SpectralFamily::OhmicExpCutoff}, {"flat", SpectralFamily::FlatBand}});
        disc.coupling_strength = s.number("strength");
        disc.cutoff = s.number("cutoff", 1.0);
        disc.omega_min = s.number("omega_min");
        disc.omega_max = s.number("omega_max");
        if (!s.has("N")) cfg.fail("/model/spectral", "missing key 'N' in 'model/spectral'");
        disc.n_modes = s.unsigned_integer("N");
        if (disc.n_modes < 1) cfg.fail(s.at("N"), "'N' must be at least 1");
    } else {
        const Section e = m.child("explicit");
        e.allow({"omegas", "u_re", "u_im", "v_re", "v_im"});
        if (!e.has("omegas")) cfg.fail("/model/explicit", "missing key 'omegas' in 'model/explicit'");
        const std::vector<double> omegas = e.numbers("omegas");
        const std::size_t n = omegas.size();
        if (n < 1) cfg.fail(e.at("omegas"), "'omegas' must not be empty");
        for (const char* key : {"u_re", "u_im", "v_re", "v_im"}) {
            if (e.has(key) && e.numbers(key).size() != n) {
                cfg.fail(e.at(key), std::string("'") + key + "' must have the same length as 'omegas'");
            }
        }
        disc.family = SpectralFamily::Explicit;
        disc.omegas = Eigen::Map<const Eigen::VectorXd>(omegas.data(), static_cast<Eigen::Index>(n));
        disc.u = complex_array(e, "u_re", "u_im", n);
        if (e.has("v_re") || e.has("v_im")) disc.v = complex_array(e, "v_re", "v_im", n);
    }
    try {
        cfg.model = build_model(disc, cfg.nu, cfg.coupling_family, cfg.units);
    } catch (const std::invalid_argument& err) {
        cfg.fail("/model", err.what());
    }
    const double min_eig = validate_model(cfg.model);
    if (!(min_eig > 0.0)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "model: Hamiltonian quadratic form is not positive definite (min eigenvalue " << min_eig << ")";
        cfg.fail("/model", msg.str());
    }
}

void parse_bath(RunConfig& cfg, const Section& b) {
    b.allow({"kind", "beta", "n", "amps_re", "amps_im", "seed"});
    BathConfig& bath = cfg.bath;
    bath.kind = b.choice<BathKind>("kind", {{"equilibrium", BathKind::Equilibrium},
                                            {"number", BathKind::Number},
                                            {"coherent", BathKind::Coherent},
                                            {"sample_number", BathKind::SampleNumber},
                                            {"sample_coherent", BathKind::SampleCoherent}});
    if (b.has("beta")) bath.beta = b.beta("beta");
    if (b.has("seed")) bath.seed = b.unsigned_integer("seed");
    const std::size_t n_modes = cfg.model.modes();
    if (bath.kind == BathKind::Number) {
        if (!b.has("n")) cfg.fail("/bath", "bath kind 'number' needs 'n'");
        bath.n = b.unsigned_integers("n");
        if (bath.n.size() != n_modes) {
            cfg.fail(b.at("n"), "'n' has " + std::to_string(bath.n.size()) + " entries, model has N = " +
                                    std::to_string(n_modes));
        }
    } else if (b.has("n")) {
        cfg.fail(b.at("n"), "'n' is only valid for bath kind 'number'");
    }
    if (bath.kind == BathKind::Coherent) {
        for (const char* key : {"amps_re", "amps_im"}) {
            if (b.has(key) && b.numbers(key).size() != n_modes) {
                cfg.fail(b.at(key), std::string("'") + key + "' must have N = " + std::to_string(n_modes) + " entries");
            }
        }
        bath.amps = complex_array(b, "amps_re", "amps_im", n_modes);
    } else {
        for (const char* key : {"amps_re", "amps_im"}) {
            if (b.has(key)) cfg.fail(b.at(key), std::string("'") + key + "' is only valid for bath kind 'coherent'");
        }
    }
}

void parse_oscillator(RunConfig& cfg, const Section& o) {
    const std::string kind = o.string("kind");
    if (kind == "gaussian") {
        o.allow({"kind", "mean_re", "mean_im", "n_ex", "aa_re", "aa_im"});
        cfg.oscillator = GaussianMoments{cplx(o.number("mean_re", 0.0), o.number("mean_im", 0.0)), o.number("n_ex", 0.0),
                                         cplx(o.number("aa_re", 0.0), o.number("aa_im", 0.0))};
    } else if (kind == "squeezed") {
        o.allow({"kind", "disp_re", "disp_im", "r", "phi"});
        cfg.oscillator =
            SqueezedDisplaced{cplx(o.number("disp_re", 0.0), o.number("disp_im", 0.0)), o.number("r", 0.0), o.number("phi", 0.0)};
    } else if (kind == "cat") {
        o.allow({"kind", "alpha_re", "alpha_im", "beta_re", "beta_im"});
        cfg.oscillator = CatState{cplx(o.number("alpha_re"), o.number("alpha_im", 0.0)),
                                  cplx(o.number("beta_re"), o.number("beta_im", 0.0))};
    } else {
        cfg.fail(o.at("kind"), "'kind' must be one of {gaussian, squeezed, cat}, got '" + kind + "'");
    }
    try {
        check_state(cfg.oscillator);
    } catch (const std::invalid_argument& err) {
        cfg.fail("/oscillator", err.what());
    }
}

void parse_outputs(RunConfig& cfg, const Section& o) {
    o.allow({"directory", "formats"});
    if (o.has("directory")) cfg.outputs.directory = o.string("directory");
    if (o.has("formats")) {
        cfg.outputs.csv = cfg.outputs.json = cfg.outputs.binary = false;
        for (const std::string& f : o.strings("formats")) {
            if (f == "csv") {
                cfg.outputs.csv = true;
            } else if (f == "json") {
                cfg.outputs.json = true;
            } else if (f == "binary") {
                cfg.outputs.binary = true;
            } else {
                cfg.fail(o.at("formats"), "unknown output format '" + f + "' (expected csv, json or binary)");
            }
        }
    }
}

void parse_experiment(RunConfig& cfg, const Section& e) {
    e.allow({"kind", "n_samples", "seed", "sweep_N", "time", "threshold", "plateau_level", "denom_floor"});
    ExperimentConfig& x = cfg.experiment;
    if (e.has("kind")) x.kind = e.string("kind");
    x.n_samples = e.unsigned_integer("n_samples", x.n_samples);
    if (x.n_samples < 2) cfg.fail(e.at("n_samples"), "'n_samples' must be at least 2");
    x.seed = e.unsigned_integer("seed", x.seed);
    if (e.has("sweep_N")) {
        for (std::uint64_t n : e.unsigned_integers("sweep_N")) x.sweep_N.push_back(n);
        if (x.sweep_N.empty() || x.sweep_N.front() < 1) cfg.fail(e.at("sweep_N"), "'sweep_N' must list positive mode counts");
        if (!std::is_sorted(x.sweep_N.begin(), x.sweep_N.end()) ||
            std::adjacent_find(x.sweep_N.begin(), x.sweep_N.end()) != x.sweep_N.end()) {
            cfg.fail(e.at("sweep_N"), "'sweep_N' must be strictly ascending");
        }
    }
    if (e.has("time")) {
        x.time = e.number("time");
        if (!(*x.time >= 0.0 && *x.time <= cfg.t_max)) cfg.fail(e.at("time"), "'time' must lie in [0, time.t_max]");
    }
    x.threshold = e.number("threshold", x.threshold);
    x.plateau_level = e.number("plateau_level", x.plateau_level);
    x.denom_floor = e.number("denom_floor", x.denom_floor);
    if (!(x.threshold > 0.0 && x.threshold < 1.0)) cfg.fail(e.at("threshold"), "'threshold' must lie in (0, 1)");
    if (!(x.plateau_level > 0.0)) cfg.fail(e.at("plateau_level"), "'plateau_level' must be positive");
    if (!(x.denom_floor >= 0.0)) cfg.fail(e.at("denom_floor"), "'denom_floor' must be non-negative");
}

}  // namespace

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& message)
    : ParameterError(source + ":" + std::to_string(line) + ": " + message), line(line) {}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::size_t RunConfig::line_of(const std::string& pointer) const {
    for (std::string p = pointer; !p.empty(); p = p.substr(0, p.rfind('/'))) {
        for (const auto& [key, line] : key_lines) {
            if (key == p) return line;
        }
    }
    return 1;
}

void RunConfig::fail(const std::string& pointer, const std::string& message) const {
    throw ConfigError(source, line_of(pointer), message);
}

ModelSpec RunConfig::model_with_modes(std::size_t n_modes) const {
    if (spectral.family == SpectralFamily::Explicit) fail("/model", "an N sweep needs a 'spectral' model, not 'explicit'");
    SpectralDiscretization disc = spectral;
    disc.n_modes = n_modes;
    return build_model(disc, nu, coupling_family, units);
}

RunConfig parse_config(std::string_view text, const std::string& source) {
    RunConfig cfg;
    cfg.source = source;
    cfg.hash = fnv1a(text);

    json root;
    const char* cursor = text.data();
    KeyLineSax sax(root, text, cursor);
    try {
        json::sax_parse(TrackingIterator{text.data(), &cursor}, TrackingIterator{text.data() + text.size(), nullptr}, &sax);
    } catch (const json::parse_error& err) {
        LineCounter lines(text);
        const std::size_t byte = err.byte > 0 ? err.byte - 1 : 0;
        std::string what = err.what();
        const auto colon = what.find(": ");
        throw ConfigError(source, lines.at(byte), "invalid JSON: " + (colon == std::string::npos ? what : what.substr(colon + 2)));
    }
    cfg.key_lines = std::move(sax.keys);

    const Section top(cfg, root, "");
    top.allow({"model", "bath", "oscillator", "time", "outputs", "experiment"});
    parse_model(cfg, top.child("model"));

    const Section t = top.child("time");
    t.allow({"t_max", "steps"});
    cfg.t_max = t.number("t_max");
    if (!(cfg.t_max > 0.0)) cfg.fail(t.at("t_max"), "'t_max' must be positive");
    if (!t.has("steps")) cfg.fail("/time", "missing key 'steps' in 'time'");
    cfg.steps = t.unsigned_integer("steps");
    if (cfg.steps < 1) cfg.fail(t.at("steps"), "'steps' must be at least 1");

    if (top.has("bath")) parse_bath(cfg, top.child("bath"));
    if (top.has("oscillator")) parse_oscillator(cfg, top.child("oscillator"));
    if (top.has("outputs")) parse_outputs(cfg, top.child("outputs"));
    if (top.has("experiment")) parse_experiment(cfg, top.child("experiment"));
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), 1, "cannot open config file");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text, path.string());
}

BathSpec resolve_bath(const RunConfig& config, const ModelSpec& model, std::uint64_t seed) {
    const BathConfig& b = config.bath;
    switch (b.kind) {
        case BathKind::Equilibrium:
            return Equilibrium{b.beta};
        case BathKind::Number:
            return NumberState{b.n};
        case BathKind::Coherent:
            return CoherentState{b.amps};
        case BathKind::SampleNumber:
            return sample_number_state(b.beta, model, seed);
        case BathKind::SampleCoherent:
            return sample_coherent_state(b.beta, model, seed);
    }
    return Equilibrium{b.beta};
}

const char* to_string(BathKind kind) noexcept {
    switch (kind) {
        case BathKind::Equilibrium: return "equilibrium";
        case BathKind::Number: return "number";
        case BathKind::Coherent: return "coherent";
        case BathKind::SampleNumber: return "sample_number";
        case BathKind::SampleCoherent: return "sample_coherent";
    }
    return "unknown";
}

}  // namespace qbath::cli
