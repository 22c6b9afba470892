#include "ratm/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

namespace ratm {

namespace {

void fmt(std::ostream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

} // namespace

// Streamed writer: the drone model has tens of millions of entries, which
// rules out building a JSON document in memory.
void write_model(std::ostream& out, const ram_mdp& m) {
    out << "{\n";
    out << "\"num_states\": " << m.num_states() << ",\n";
    out << "\"num_actions\": " << m.num_actions() << ",\n";
    out << "\"discount\": ";
    fmt(out, m.discount());
    out << ",\n\"measure_cost\": ";
    fmt(out, m.measure_cost());
    out << ",\n\"initial_state\": " << m.initial_state() << ",\n";
    out << "\"terminals\": [";
    for (std::size_t i = 0; i < m.terminal_states().size(); ++i)
        out << (i != 0 ? "," : "") << m.terminal_states()[i];
    out << "],\n\"rows\": [\n";
    bool first = true;
    for (state_id s = 0; s < m.num_states(); ++s) {
        for (action_id a = 0; a < m.num_actions(); ++a) {
            if (!first) out << ",\n";
            first = false;
            out << "{\"s\":" << s << ",\"a\":" << a << ",\"entries\":[";
            const auto row = m.row(s, a);
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i != 0) out << ",";
                out << "{\"sp\":" << row.succ[i] << ",\"lo\":";
                fmt(out, row.lo_at(i));
                out << ",\"hi\":";
                fmt(out, row.hi[i]);
                out << "}";
            }
            out << "]}";
        }
    }
    out << "\n],\n\"rewards\": [\n";
    first = true;
    for (state_id s = 0; s < m.num_states(); ++s) {
        for (action_id a = 0; a < m.num_actions(); ++a) {
            if (!first) out << ",\n";
            first = false;
            out << "{\"s\":" << s << ",\"a\":" << a << ",\"r\":";
            fmt(out, m.reward(s, a));
            out << "}";
        }
    }
    out << "\n]\n}\n";
    if (!out) throw io_error("failed while writing model");
}

void write_model_file(const std::string& path, const ram_mdp& m) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    write_model(out, m);
    out.flush();
    if (!out) throw io_error("failed while writing " + path);
}

ram_mdp read_model(std::istream& in) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        const auto num_states = j.at("num_states").get<std::int32_t>();
        const auto num_actions = j.at("num_actions").get<std::int32_t>();
        ram_mdp_builder b(num_states, num_actions);
        b.set_discount(j.at("discount").get<double>());
        b.set_measure_cost(j.at("measure_cost").get<double>());
        b.set_initial_state(j.at("initial_state").get<state_id>());
        for (const auto& t : j.at("terminals")) b.add_terminal(t.get<state_id>());

        // rows may arrive in any order; rewards are matched by (s, a)
        const auto pairs =
            static_cast<std::size_t>(num_states) * static_cast<std::size_t>(num_actions);
        std::vector<double> rewards(pairs, 0.0);
        for (const auto& r : j.at("rewards")) {
            const auto s = r.at("s").get<state_id>();
            const auto a = r.at("a").get<action_id>();
            if (s < 0 || s >= num_states || a < 0 || a >= num_actions)
                throw io_error("reward index out of range");
            rewards[static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions) +
                    static_cast<std::size_t>(a)] = r.at("r").get<double>();
        }
        std::vector<std::vector<row_entry>> rows(pairs);
        std::vector<bool> seen(pairs, false);
        for (const auto& row : j.at("rows")) {
            const auto s = row.at("s").get<state_id>();
            const auto a = row.at("a").get<action_id>();
            if (s < 0 || s >= num_states || a < 0 || a >= num_actions)
                throw io_error("row index out of range");
            const auto flat =
                static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions) +
                static_cast<std::size_t>(a);
            if (seen[flat]) throw io_error("duplicate row in model file");
            seen[flat] = true;
            auto& entries = rows[flat];
            for (const auto& e : row.at("entries"))
                entries.push_back({e.at("sp").get<state_id>(), e.at("lo").get<double>(),
                                   e.at("hi").get<double>()});
        }
        for (state_id s = 0; s < num_states; ++s)
            for (action_id a = 0; a < num_actions; ++a) {
                const auto flat =
                    static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions) +
                    static_cast<std::size_t>(a);
                if (!seen[flat]) throw io_error("missing row in model file");
                b.add_row(s, a, std::move(rows[flat]), rewards[flat]);
            }
        return std::move(b).build();
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("malformed model file: ") + e.what());
    }
}

ram_mdp read_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    return read_model(in);
}

} // namespace ratm
