#include "ratm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ratm {

namespace {

void check_dims(std::int32_t num_states, std::int32_t num_actions) {
    if (num_states <= 0 || num_actions <= 0)
        throw std::invalid_argument("model must have at least one state and one action");
}

} // namespace

ram_mdp_builder::ram_mdp_builder(std::int32_t num_states, std::int32_t num_actions)
    : num_states_(num_states), num_actions_(num_actions) {
    check_dims(num_states, num_actions);
    const auto pairs = static_cast<std::size_t>(num_states) * static_cast<std::size_t>(num_actions);
    offsets_.reserve(pairs + 1);
    offsets_.push_back(0);
    reward_.reserve(pairs);
    terminal_mask_.assign(static_cast<std::size_t>(num_states), 0);
}

void ram_mdp_builder::add_row(state_id s, action_id a, std::vector<row_entry> entries,
                              double reward) {
    const auto flat = static_cast<std::int64_t>(s) * num_actions_ + a;
    if (s < 0 || s >= num_states_ || a < 0 || a >= num_actions_)
        throw std::invalid_argument("row index out of range");
    if (flat != next_flat_)
        throw std::invalid_argument("rows must be added in (state, action) order");
    std::sort(entries.begin(), entries.end(),
              [](const row_entry& x, const row_entry& y) { return x.succ < y.succ; });
    for (std::size_t i = 0; i + 1 < entries.size(); ++i)
        if (entries[i].succ == entries[i + 1].succ)
            throw std::invalid_argument("duplicate successor in row");
    for (const auto& e : entries) {
        if (e.succ < 0 || e.succ >= num_states_)
            throw std::invalid_argument("successor out of range");
        succ_.push_back(e.succ);
        lo_.push_back(e.lo);
        hi_.push_back(e.hi);
        if (e.lo != 0.0) any_lo_ = true;
    }
    offsets_.push_back(static_cast<std::int64_t>(succ_.size()));
    reward_.push_back(reward);
    ++next_flat_;
}

void ram_mdp_builder::add_terminal(state_id s) {
    if (s < 0 || s >= num_states_) throw std::invalid_argument("terminal out of range");
    terminal_mask_[static_cast<std::size_t>(s)] = 1;
}

ram_mdp ram_mdp_builder::build() && {
    const auto pairs = static_cast<std::int64_t>(num_states_) * num_actions_;
    if (next_flat_ != pairs)
        throw std::invalid_argument("every (state, action) pair needs a row");
    ram_mdp m;
    m.num_states_ = num_states_;
    m.num_actions_ = num_actions_;
    m.offsets_ = std::move(offsets_);
    m.succ_ = std::move(succ_);
    if (any_lo_) m.lo_ = std::move(lo_);
    m.hi_ = std::move(hi_);
    m.reward_ = std::move(reward_);
    m.terminal_mask_ = std::move(terminal_mask_);
    for (state_id s = 0; s < m.num_states_; ++s)
        if (m.terminal_mask_[static_cast<std::size_t>(s)]) m.terminals_.push_back(s);
    m.measure_cost_ = measure_cost_;
    m.discount_ = discount_;
    m.initial_ = initial_;
    return m;
}

bool operator==(const ram_mdp& a, const ram_mdp& b) {
    auto lo_equal = [&]() {
        if (!a.lo_.empty() && !b.lo_.empty()) return a.lo_ == b.lo_;
        const auto& dense = a.lo_.empty() ? b.lo_ : a.lo_;
        return std::all_of(dense.begin(), dense.end(), [](double v) { return v == 0.0; });
    };
    return a.num_states_ == b.num_states_ && a.num_actions_ == b.num_actions_ &&
           a.offsets_ == b.offsets_ && a.succ_ == b.succ_ && a.hi_ == b.hi_ && lo_equal() &&
           a.reward_ == b.reward_ && a.terminal_mask_ == b.terminal_mask_ &&
           a.measure_cost_ == b.measure_cost_ && a.discount_ == b.discount_ &&
           a.initial_ == b.initial_;
}

point_model_builder::point_model_builder(std::int32_t num_states, std::int32_t num_actions)
    : num_states_(num_states), num_actions_(num_actions) {
    check_dims(num_states, num_actions);
    offsets_.push_back(0);
    terminal_mask_.assign(static_cast<std::size_t>(num_states), 0);
}

void point_model_builder::add_row(state_id s, action_id a,
                                  std::vector<std::pair<state_id, double>> entries,
                                  double reward) {
    const auto flat = static_cast<std::int64_t>(s) * num_actions_ + a;
    if (s < 0 || s >= num_states_ || a < 0 || a >= num_actions_)
        throw std::invalid_argument("row index out of range");
    if (flat != next_flat_)
        throw std::invalid_argument("rows must be added in (state, action) order");
    std::sort(entries.begin(), entries.end());
    for (std::size_t i = 0; i + 1 < entries.size(); ++i)
        if (entries[i].first == entries[i + 1].first)
            throw std::invalid_argument("duplicate successor in row");
    for (const auto& [sp, p] : entries) {
        if (sp < 0 || sp >= num_states_)
            throw std::invalid_argument("successor out of range");
        succ_.push_back(sp);
        prob_.push_back(p);
    }
    offsets_.push_back(static_cast<std::int64_t>(succ_.size()));
    reward_.push_back(reward);
    ++next_flat_;
}

void point_model_builder::add_terminal(state_id s) {
    if (s < 0 || s >= num_states_) throw std::invalid_argument("terminal out of range");
    terminal_mask_[static_cast<std::size_t>(s)] = 1;
}

point_model point_model_builder::build() && {
    const auto pairs = static_cast<std::int64_t>(num_states_) * num_actions_;
    if (next_flat_ != pairs)
        throw std::invalid_argument("every (state, action) pair needs a row");
    point_model m;
    m.num_states_ = num_states_;
    m.num_actions_ = num_actions_;
    m.offsets_ = std::move(offsets_);
    m.succ_ = std::move(succ_);
    m.prob_ = std::move(prob_);
    m.reward_ = std::move(reward_);
    m.terminal_mask_ = std::move(terminal_mask_);
    for (state_id s = 0; s < m.num_states_; ++s)
        if (m.terminal_mask_[static_cast<std::size_t>(s)]) m.terminals_.push_back(s);
    m.measure_cost_ = measure_cost_;
    m.discount_ = discount_;
    m.initial_ = initial_;
    return m;
}

ram_mdp point_model::as_degenerate_ram_mdp() const {
    ram_mdp m;
    m.num_states_ = num_states_;
    m.num_actions_ = num_actions_;
    m.offsets_ = offsets_;
    m.succ_ = succ_;
    m.lo_ = prob_;
    m.hi_ = prob_;
    m.reward_ = reward_;
    m.terminal_mask_ = terminal_mask_;
    m.terminals_ = terminals_;
    m.measure_cost_ = measure_cost_;
    m.discount_ = discount_;
    m.initial_ = initial_;
    return m;
}

belief belief::from_entries(std::vector<std::pair<state_id, double>> raw) {
    std::sort(raw.begin(), raw.end());
    belief b;
    b.entries.reserve(raw.size());
    for (const auto& [s, p] : raw) {
        if (!b.entries.empty() && b.entries.back().first == s)
            b.entries.back().second += p;
        else
            b.entries.emplace_back(s, p);
    }
    std::erase_if(b.entries, [](const auto& e) { return e.second <= 0.0; });
    double total = b.sum();
    if (std::abs(total - 1.0) > prob_eps)
        throw contract_error("belief mass " + std::to_string(total) + " deviates from 1");
    for (auto& e : b.entries) e.second /= total;
    return b;
}

double belief::sum() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.second;
    return s;
}

double belief::entropy() const {
    double h = 0.0;
    for (const auto& e : entries) h -= e.second * std::log(e.second);
    return h;
}

double belief::at(state_id s) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), s,
                               [](const auto& e, state_id v) { return e.first < v; });
    return (it != entries.end() && it->first == s) ? it->second : 0.0;
}

validation_report validate_model(const ram_mdp& m) {
    validation_report rep;
    auto add = [&rep](state_id s, action_id a, std::string msg) {
        rep.issues.push_back({s, a, std::move(msg)});
    };

    if (m.discount() <= 0.0 || m.discount() > 1.0)
        add(-1, -1, "discount must lie in (0, 1]");
    if (m.measure_cost() < 0.0) add(-1, -1, "measuring cost must be non-negative");
    if (m.initial_state() < 0 || m.initial_state() >= m.num_states())
        add(-1, -1, "initial state out of range");

    for (state_id s = 0; s < m.num_states(); ++s) {
        for (action_id a = 0; a < m.num_actions(); ++a) {
            const auto row = m.row(s, a);
            if (!std::isfinite(m.reward(s, a))) add(s, a, "reward not finite");
            double sum_lo = 0.0, sum_hi = 0.0;
            bool bounds_ok = true;
            for (std::size_t i = 0; i < row.size(); ++i) {
                const double lo = row.lo_at(i), hi = row.hi[i];
                if (!(lo >= 0.0) || !(hi <= 1.0) || !std::isfinite(lo) || !std::isfinite(hi)) {
                    add(s, a, "interval outside [0, 1]");
                    bounds_ok = false;
                }
                if (lo > hi) {
                    add(s, a, "lo>hi");
                    bounds_ok = false;
                }
                if (i + 1 < row.size() && row.succ[i] >= row.succ[i + 1])
                    add(s, a, "successors not sorted and distinct");
                sum_lo += lo;
                sum_hi += hi;
            }
            if (bounds_ok && (sum_lo > 1.0 + prob_eps || sum_hi < 1.0 - prob_eps))
                add(s, a, "row infeasible");
            if (m.is_terminal(s)) {
                const bool self_loop = row.size() == 1 && row.succ[0] == s &&
                                       row.lo_at(0) == 1.0 && row.hi[0] == 1.0;
                if (!self_loop) add(s, a, "terminal state lacks a [1,1] self-loop");
            }
        }
    }
    return rep;
}

ram_mdp intervals_from_confidence(const point_model& base, double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::domain_error("confidence level must lie in (0, 1]");
    ram_mdp_builder b(base.num_states(), base.num_actions());
    b.set_measure_cost(base.measure_cost());
    b.set_discount(base.discount());
    b.set_initial_state(base.initial_state());
    for (state_id t : base.terminal_states()) b.add_terminal(t);
    for (state_id s = 0; s < base.num_states(); ++s) {
        const bool terminal = base.is_terminal(s);
        for (action_id a = 0; a < base.num_actions(); ++a) {
            const auto row = base.row(s, a);
            std::vector<row_entry> entries;
            entries.reserve(row.size());
            for (std::size_t i = 0; i < row.size(); ++i) {
                const double p = row.prob[i];
                if (p <= 0.0) continue;
                if (terminal)
                    entries.push_back({row.succ[i], 1.0, 1.0});
                else
                    entries.push_back({row.succ[i], 0.0, std::min(p / alpha, 1.0)});
            }
            b.add_row(s, a, std::move(entries), base.reward(s, a));
        }
    }
    return std::move(b).build();
}

average_model_result average_point_model(const ram_mdp& m) {
    point_model_builder b(m.num_states(), m.num_actions());
    b.set_measure_cost(m.measure_cost());
    b.set_discount(m.discount());
    b.set_initial_state(m.initial_state());
    for (state_id t : m.terminal_states()) b.add_terminal(t);
    bool renormalized = false;
    for (state_id s = 0; s < m.num_states(); ++s) {
        for (action_id a = 0; a < m.num_actions(); ++a) {
            const auto row = m.row(s, a);
            std::vector<std::pair<state_id, double>> entries;
            entries.reserve(row.size());
            double total = 0.0;
            for (std::size_t i = 0; i < row.size(); ++i) {
                const double mid = 0.5 * (row.lo_at(i) + row.hi[i]);
                entries.emplace_back(row.succ[i], mid);
                total += mid;
            }
            if (std::abs(total - 1.0) > prob_eps) {
                if (total <= 0.0) throw feasibility_error("row midpoints sum to zero");
                for (auto& e : entries) e.second /= total;
                renormalized = true;
            }
            b.add_row(s, a, std::move(entries), m.reward(s, a));
        }
    }
    return {std::move(b).build(), renormalized};
}

double scalarized_reward(const ram_mdp& m, state_id s, action_pair ap) {
    return m.reward(s, ap.control) - (ap.measure ? m.measure_cost() : 0.0);
}

} // namespace ratm
