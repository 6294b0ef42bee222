#include "memflow/config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "memflow/errors.hpp"

namespace memflow {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    size_t start = 0;
    for (;;) {
        const size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace

int parse_int(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE ||
        v < INT32_MIN || v > INT32_MAX)
        throw ConfigError(msgf("%s: '%s' is not an integer", what.c_str(), text.c_str()));
    return static_cast<int>(v);
}

size_t parse_size(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError(
            msgf("%s: '%s' is not a nonnegative integer", what.c_str(), text.c_str()));
    return static_cast<size_t>(v);
}

uint64_t parse_u64(const std::string& text, const std::string& what) {
    return static_cast<uint64_t>(parse_size(text, what));
}

double parse_real(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
        throw ConfigError(
            msgf("%s: '%s' is not a finite number", what.c_str(), text.c_str()));
    return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError(msgf("%s: '%s' is not a boolean", what.c_str(), text.c_str()));
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<int> out;
    const std::string t = trim(text);
    if (t.empty()) return out;
    for (const std::string& part : split(t, ','))
        out.push_back(parse_int(part, what));
    return out;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    const std::string t = trim(text);
    if (t.empty()) return out;
    if (t.find(':') != std::string::npos) {
        const std::vector<std::string> parts = split(t, ':');
        if (parts.size() != 3)
            throw ConfigError(
                msgf("%s: a range needs the form lo:step:hi, got '%s'", what.c_str(),
                     text.c_str()));
        const double lo = parse_real(parts[0], what);
        const double step = parse_real(parts[1], what);
        const double hi = parse_real(parts[2], what);
        if (step <= 0.0 || hi < lo)
            throw ConfigError(msgf("%s: bad range '%s'", what.c_str(), text.c_str()));
        // Inclusive grid with a half-step tolerance on the upper end.
        for (long i = 0;; ++i) {
            const double v = lo + static_cast<double>(i) * step;
            if (v > hi + step * 0.5) break;
            out.push_back(v);
        }
        return out;
    }
    for (const std::string& part : split(t, ','))
        out.push_back(parse_real(part, what));
    return out;
}

namespace {

struct KeyContext {
    std::string file;
    size_t line = 0;

    std::string where(const std::string& key) const {
        return msgf("%s:%zu: %s", file.c_str(), line, key.c_str());
    }
};

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value,
               const KeyContext& ctx) {
    const std::string w = ctx.where(key);
    if (key == "system") {
        cfg.system = trim(value);
    } else if (key == "generation.num_trajectories") {
        cfg.gen_trajectories = parse_size(value, w);
    } else if (key == "generation.steps") {
        cfg.gen_steps = parse_size(value, w);
    } else if (key == "generation.dt") {
        cfg.dt = parse_real(value, w);
    } else if (key == "generation.substeps") {
        cfg.gen_substeps = parse_int(value, w);
    } else if (key == "generation.seed") {
        cfg.gen_seed = parse_u64(value, w);
    } else if (key == "dataset.n_mem") {
        cfg.n_mem = parse_int(value, w);
    } else if (key == "dataset.n_rec") {
        cfg.n_rec = parse_int(value, w);
    } else if (key == "dataset.samples_per_traj") {
        cfg.samples_per_traj = parse_int(value, w);
    } else if (key == "dataset.seed") {
        cfg.dataset_seed = parse_u64(value, w);
    } else if (key == "model.widths") {
        cfg.widths = parse_int_list(value, w);
    } else if (key == "train.lr") {
        cfg.lr = parse_real(value, w);
    } else if (key == "train.batch") {
        cfg.batch = parse_int(value, w);
    } else if (key == "train.epochs") {
        cfg.epochs = parse_int(value, w);
    } else if (key == "train.seed") {
        cfg.train_seed = parse_u64(value, w);
    } else if (key == "train.val_fraction") {
        cfg.val_fraction = parse_real(value, w);
    } else if (key == "train.normalize") {
        cfg.normalize = parse_bool(value, w);
    } else if (key == "eval.t_eval") {
        cfg.t_eval = parse_real(value, w);
    } else if (key == "eval.runs") {
        cfg.eval_runs = parse_int(value, w);
    } else if (key == "eval.seed") {
        cfg.eval_seed = parse_u64(value, w);
    } else if (key == "eval.substeps") {
        cfg.eval_substeps = parse_int(value, w);
    } else if (key == "sweep.n_mem_list") {
        cfg.sweep_n_mem = parse_int_list(value, w);
    } else if (key == "sweep.n_rec_list") {
        cfg.sweep_n_rec = parse_int_list(value, w);
    } else if (key == "bifurcation.grid") {
        cfg.bif_grid = parse_real_list(value, w);
    } else if (key == "bifurcation.x0") {
        std::vector<double> x0;
        for (const std::string& part : split(trim(value), ','))
            x0.push_back(parse_real(part, w));
        cfg.bif_x0 = x0;
    } else if (key == "bifurcation.window_start") {
        cfg.bif_window_start = parse_real(value, w);
    } else if (key == "bifurcation.window_end") {
        cfg.bif_window_end = parse_real(value, w);
    } else {
        throw ConfigError(msgf("%s:%zu: unknown key '%s'", ctx.file.c_str(), ctx.line,
                               key.c_str()));
    }
}

void load_into(ExperimentConfig& cfg, const std::filesystem::path& path,
               std::vector<std::filesystem::path>& stack) {
    const std::filesystem::path canonical =
        std::filesystem::weakly_canonical(path);
    for (const auto& open : stack)
        if (open == canonical)
            throw ConfigError(
                msgf("config include cycle through '%s'", path.string().c_str()));

    std::ifstream in(path);
    if (!in)
        throw ConfigError(msgf("cannot open config file '%s'", path.string().c_str()));
    stack.push_back(canonical);

    std::string line;
    KeyContext ctx{path.string(), 0};
    while (std::getline(in, line)) {
        ctx.line += 1;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(msgf("%s:%zu: expected 'key = value', got '%s'",
                                   ctx.file.c_str(), ctx.line, stripped.c_str()));
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw ConfigError(msgf("%s:%zu: empty key", ctx.file.c_str(), ctx.line));
        if (key == "include") {
            const std::filesystem::path inc =
                path.parent_path() / std::filesystem::path(value);
            load_into(cfg, inc, stack);
            continue;
        }
        apply_key(cfg, key, value, ctx);
    }
    stack.pop_back();
}

}  // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    ExperimentConfig cfg;
    std::vector<std::filesystem::path> stack;
    load_into(cfg, path, stack);
    return cfg;
}

}  // namespace memflow
