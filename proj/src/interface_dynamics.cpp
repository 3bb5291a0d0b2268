#include "wallflip/interface_dynamics.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace wallflip {

void validate_state(const InterfaceState& s) {
  if (s.h.size() < 3) {
    throw std::invalid_argument("profile needs at least one active site");
  }
  if (s.h[0] != 0) {
    throw std::invalid_argument("profile must be pinned at the origin");
  }
  for (std::size_t n = 0; n + 1 < s.h.size(); ++n) {
    if (std::abs(s.h[n + 1] - s.h[n]) != 1) {
      throw std::invalid_argument("neighbouring heights must differ by 1");
    }
  }
  for (std::int32_t v : s.h) {
    if (v < 0) throw std::invalid_argument("heights must be nonnegative");
  }
}

FlipOutcome attempt_flip(InterfaceState& s, int n) {
  const int lap = discrete_laplacian(s, n);
  if (lap == 0) return FlipOutcome::NoCorner;
  if (lap == -2 && s.h[n] == 1) return FlipOutcome::Blocked;
  s.h[n] += lap;
  return FlipOutcome::Flipped;
}

std::vector<int> blocked_sites(const InterfaceState& s) {
  std::vector<int> out;
  for (int n = 1; n <= s.active_sites(); ++n) {
    if (is_blocked(s, n)) out.push_back(n);
  }
  return out;
}

InterfaceState EventHistory::final_state() const {
  InterfaceState s{initial_h};
  for (const FlipEvent& ev : events) {
    if (ev.outcome == FlipOutcome::Flipped) s.h[ev.site] += ev.delta;
  }
  return s;
}

std::vector<IntervalSummary> interval_summaries(const EventHistory& h) {
  std::vector<IntervalSummary> out;
  h.replay(
      [&](double t0, double t1, const InterfaceState& s) {
        IntervalSummary row;
        row.t_start = t0;
        row.t_end = t1;
        for (int n = 1; n <= s.active_sites(); ++n) {
          if (discrete_laplacian(s, n) != 0) row.corner_sites.push_back(n);
        }
        row.blocked = blocked_sites(s);
        out.push_back(std::move(row));
      },
      [](const FlipEvent&, const InterfaceState&) {},
      [](const FlipEvent&, const InterfaceState&) {});
  return out;
}

void write_events_jsonl(const EventHistory& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (const FlipEvent& ev : h.events) {
    if (ev.outcome == FlipOutcome::NoCorner) continue;
    nlohmann::json row;
    row["t"] = ev.t;
    row["site"] = ev.site;
    row["delta"] = static_cast<int>(ev.delta);
    row["outcome"] =
        ev.outcome == FlipOutcome::Flipped ? "flipped" : "blocked";
    out << row.dump() << '\n';
  }
}

void write_intervals_csv(const EventHistory& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "t_start,t_end,n_corners,n_blocked\n";
  for (const IntervalSummary& row : interval_summaries(h)) {
    nlohmann::json a = row.t_start;
    nlohmann::json b = row.t_end;
    out << a.dump() << ',' << b.dump() << ',' << row.corner_sites.size()
        << ',' << row.blocked.size() << '\n';
  }
}

}  // namespace wallflip
