#include "ratm/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

namespace ratm {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// strips a trailing comment that is not inside a string literal
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

double parse_number(const std::string& tok, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw config_error("line " + std::to_string(line_no) + ": expected a number, got '" +
                           tok + "'");
    }
}

struct raw_value {
    std::string scalar;
    std::vector<std::string> array;
    bool is_array = false;
    bool is_string = false;
    int line_no = 0;
};

std::string parse_string_token(const std::string& tok, int line_no) {
    if (tok.size() < 2 || tok.front() != '"' || tok.back() != '"')
        throw config_error("line " + std::to_string(line_no) + ": expected a quoted string");
    return tok.substr(1, tok.size() - 2);
}

std::vector<std::string> split_array(const std::string& body, int line_no) {
    std::vector<std::string> items;
    std::string cur;
    bool in_string = false;
    for (char ch : body) {
        if (ch == '"') in_string = !in_string;
        if (ch == ',' && !in_string) {
            items.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    const auto last = trim(cur);
    if (!last.empty()) items.push_back(last);
    for (const auto& it : items)
        if (it.empty()) throw config_error("line " + std::to_string(line_no) + ": empty array item");
    return items;
}

std::map<std::string, raw_value> parse_toml_subset(const std::string& text) {
    std::map<std::string, raw_value> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(strip_comment(line));
        if (stripped.empty()) continue;
        if (stripped.front() == '[')
            throw config_error("line " + std::to_string(line_no) +
                               ": tables are not supported; use flat keys");
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string val = trim(stripped.substr(eq + 1));
        if (key.empty() || val.empty())
            throw config_error("line " + std::to_string(line_no) + ": expected key = value");
        if (kv.count(key) != 0)
            throw config_error("line " + std::to_string(line_no) + ": duplicate key '" + key +
                               "'");
        raw_value rv;
        rv.line_no = line_no;
        if (val.front() == '[') {
            if (val.back() != ']')
                throw config_error("line " + std::to_string(line_no) +
                                   ": arrays must close on the same line");
            rv.is_array = true;
            rv.array = split_array(val.substr(1, val.size() - 2), line_no);
        } else if (val.front() == '"') {
            rv.is_string = true;
            rv.scalar = parse_string_token(val, line_no);
        } else {
            rv.scalar = val;
        }
        kv.emplace(key, std::move(rv));
    }
    return kv;
}

} // namespace

experiment_config experiment_config::parse(const std::string& text) {
    auto kv = parse_toml_subset(text);
    experiment_config cfg;

    auto take = [&kv](const std::string& key) -> raw_value* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto want_string = [&](const std::string& key, std::string& dst) {
        if (const auto* rv = take(key)) {
            if (!rv->is_string || rv->is_array)
                throw config_error(key + " must be a quoted string");
            dst = rv->scalar;
        }
    };
    auto want_double = [&](const std::string& key, double& dst) {
        if (const auto* rv = take(key)) {
            if (rv->is_array || rv->is_string) throw config_error(key + " must be a number");
            dst = parse_number(rv->scalar, rv->line_no);
        }
    };
    auto want_int = [&](const std::string& key, auto& dst) {
        if (const auto* rv = take(key)) {
            if (rv->is_array || rv->is_string) throw config_error(key + " must be an integer");
            const double v = parse_number(rv->scalar, rv->line_no);
            dst = static_cast<std::decay_t<decltype(dst)>>(v);
            if (static_cast<double>(dst) != v)
                throw config_error(key + " must be an integer");
        }
    };

    want_string("env", cfg.env);
    want_string("sweep", cfg.sweep);
    want_string("nature", cfg.nature);
    want_string("output", cfg.output);
    want_int("episodes", cfg.episodes);
    want_int("seed", cfg.seed);
    want_int("horizon", cfg.horizon);
    want_int("jobs", cfg.jobs);
    want_int("width", cfg.width);
    want_int("height", cfg.height);
    want_double("planning_alpha", cfg.planning_alpha);
    want_double("c", cfg.c);
    want_double("p_max", cfg.p_max);
    want_double("reward_scale", cfg.reward_scale);
    want_double("alpha", cfg.alpha);
    want_double("step_penalty", cfg.step_penalty);
    want_double("gamma", cfg.gamma);

    if (const auto* rv = take("values")) {
        if (!rv->is_array) throw config_error("values must be an array");
        for (const auto& tok : rv->array) cfg.values.push_back(parse_number(tok, rv->line_no));
    }
    if (const auto* rv = take("planners")) {
        if (!rv->is_array) throw config_error("planners must be an array");
        for (const auto& tok : rv->array)
            cfg.planners.push_back(parse_string_token(tok, rv->line_no));
    }

    static const char* known[] = {"env",    "sweep",         "nature",       "output",
                                  "episodes", "seed",        "horizon",      "jobs",
                                  "width",  "height",        "planning_alpha", "c",
                                  "p_max",  "reward_scale",  "alpha",        "step_penalty",
                                  "gamma",  "values",        "planners"};
    for (const auto& [key, rv] : kv) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&key](const char* k) { return key == k; }) == std::end(known))
            throw config_error("line " + std::to_string(rv.line_no) + ": unknown key '" + key +
                               "'");
    }

    cfg.validate();
    return cfg;
}

experiment_config experiment_config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void experiment_config::validate() const {
    static const char* envs[] = {"ab", "lucky-unlucky", "belief-dep", "snakemaze", "drone"};
    if (std::find_if(std::begin(envs), std::end(envs),
                     [this](const char* e) { return env == e; }) == std::end(envs))
        throw config_error("unknown env: '" + env + "'");
    static const char* sweeps[] = {"c", "p_max", "alpha", "misspec"};
    if (std::find_if(std::begin(sweeps), std::end(sweeps),
                     [this](const char* s) { return sweep == s; }) == std::end(sweeps))
        throw config_error("unknown sweep: '" + sweep + "'");
    if (values.empty()) throw config_error("values must not be empty");
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        if (values[i] >= values[i + 1])
            throw config_error("sweep values must be strictly increasing");
    if (planners.empty()) throw config_error("planners must not be empty");
    if (episodes < 1) throw config_error("episodes must be at least 1");
    if (sweep == "misspec" && !(planning_alpha > 0.0 && planning_alpha <= 1.0))
        throw config_error("misspec sweep needs planning_alpha in (0, 1]");
    if (nature != "rmdp-worst" && nature != "average")
        throw config_error("nature must be rmdp-worst or average");
    if (output.empty()) throw config_error("output path is required");
    if ((sweep == "alpha" || sweep == "misspec") && (env == "ab" || env == "lucky-unlucky" ||
                                                     env == "belief-dep"))
        throw config_error("alpha sweeps need a confidence-parameterized env");
}

} // namespace ratm
