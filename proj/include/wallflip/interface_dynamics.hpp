#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wallflip/rng.hpp"

namespace wallflip {

/// Height profile on lattice sites 0..L+1. Site 0 is pinned at height 0,
/// sites 1..L are active (their corners may flip), and site L+1 is frozen;
/// it acts as the right edge of the truncated window. Heights are
/// nonnegative and neighbouring heights differ by exactly 1.
struct InterfaceState {
  std::vector<std::int32_t> h;
  int active_sites() const { return static_cast<int>(h.size()) - 2; }
};

/// Throws std::invalid_argument unless the profile is a nonnegative
/// unit-step path pinned at the origin with at least one active site.
void validate_state(const InterfaceState& s);

/// h(n+1) + h(n-1) - 2 h(n) for an active site n; one of {-2, 0, +2}.
inline int discrete_laplacian(const InterfaceState& s, int n) {
  return s.h[n + 1] + s.h[n - 1] - 2 * s.h[n];
}

/// True when the corner flip at n would push the height negative. The only
/// such local configuration is h(n) = 1 with both neighbours at 0.
inline bool is_blocked(const InterfaceState& s, int n) {
  return s.h[n] == 1 && s.h[n - 1] == 0 && s.h[n + 1] == 0;
}

enum class FlipOutcome : std::uint8_t { Flipped, Blocked, NoCorner };

/// One clock ring: site and absolute (unscaled) time, the height change that
/// was applied (Flipped) or would have been (-2 for Blocked, 0 for NoCorner).
struct FlipEvent {
  double t = 0.0;
  std::int32_t site = 0;
  std::int8_t delta = 0;
  FlipOutcome outcome = FlipOutcome::NoCorner;
};

/// Applies the corner flip at active site n if it is allowed; mutates the
/// state in place and reports what happened.
FlipOutcome attempt_flip(InterfaceState& s, int n);

std::vector<int> blocked_sites(const InterfaceState& s);

struct LoggingPolicy {
  /// Record NoCorner rings too (off by default: they do not change the state
  /// and the interval record already covers them).
  bool no_corner_rings = false;
};

/// Complete record of a run: initial profile plus every logged event. The
/// profile is constant between consecutive events, so interval views are
/// reconstructed exactly by replay instead of being stored.
struct EventHistory {
  std::vector<std::int32_t> initial_h;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::vector<FlipEvent> events;

  /// Walks the run once. on_interval(t0, t1, state) fires for every span
  /// between consecutive logged events (state is the configuration on the
  /// whole span); around each event, on_before(ev, state) fires with the
  /// pre-event state and on_after(ev, state) with the post-event state.
  template <class FI, class FB, class FA>
  void replay(FI&& on_interval, FB&& on_before, FA&& on_after) const {
    InterfaceState s{initial_h};
    const InterfaceState& cs = s;
    double t = t_begin;
    for (const FlipEvent& ev : events) {
      on_interval(t, ev.t, cs);
      on_before(ev, cs);
      if (ev.outcome == FlipOutcome::Flipped) s.h[ev.site] += ev.delta;
      on_after(ev, cs);
      t = ev.t;
    }
    on_interval(t, t_end, cs);
  }

  /// Final configuration implied by the record.
  InterfaceState final_state() const;
};

struct IntervalSummary {
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<int> corner_sites;
  std::vector<int> blocked;
};

/// Materialized interval view (one row per inter-event span).
std::vector<IntervalSummary> interval_summaries(const EventHistory& h);

struct NullObserver {
  void on_interval(double, double, const InterfaceState&) {}
  void on_before(const FlipEvent&, const InterfaceState&) {}
  void on_after(const FlipEvent&, const InterfaceState&) {}
};

/// Captures the height profile at each requested (unscaled) time. Request
/// times must be sorted; each snapshot is the configuration in force at that
/// instant (events at exactly the snapshot time land after it).
struct SnapshotObserver {
  std::vector<double> times;
  std::vector<std::vector<std::int32_t>> snapshots;

  explicit SnapshotObserver(std::vector<double> ts) : times(std::move(ts)) {}

  void on_interval(double t0, double t1, const InterfaceState& s) {
    while (next_ < times.size() && times[next_] >= t0 && times[next_] < t1) {
      snapshots.push_back(s.h);
      ++next_;
    }
    if (next_ < times.size() && times[next_] == t1) {
      snapshots.push_back(s.h);
      ++next_;
    }
  }
  void on_before(const FlipEvent&, const InterfaceState&) {}
  void on_after(const FlipEvent&, const InterfaceState&) {}

 private:
  std::size_t next_ = 0;
};

/// Draws the next clock ring by superposition: waiting time Exp(L), then a
/// uniformly chosen active site, in that order (the draw order is part of
/// the reproducibility contract). Applies the flip if allowed.
inline FlipEvent step_to_next_event(InterfaceState& s, double t_now,
                                    RngStream& rng) {
  const int L = s.active_sites();
  const double t = t_now + rng.exponential(static_cast<double>(L));
  const int site = 1 + static_cast<int>(rng.uniform_below(L));
  FlipEvent ev;
  ev.t = t;
  ev.site = site;
  ev.delta = static_cast<std::int8_t>(discrete_laplacian(s, site));
  ev.outcome = attempt_flip(s, site);
  return ev;
}

/// Runs the dynamics from time t0 to `horizon`. The observer sees every
/// inter-ring interval and every ring (before and after the mutation); the
/// optional record receives Flipped and Blocked events, plus NoCorner rings
/// when the logging policy asks for them. Identical (state, seed, stream)
/// inputs produce bit-identical event sequences.
template <class Obs>
void run_until(InterfaceState& s, double t0, double horizon, RngStream& rng,
               Obs&& obs, EventHistory* record = nullptr,
               LoggingPolicy log = {}) {
  const int L = s.active_sites();
  if (record) {
    record->initial_h = s.h;
    record->t_begin = t0;
    record->t_end = horizon;
    record->events.clear();
  }
  const InterfaceState& cs = s;
  double t = t0;
  for (;;) {
    const double te = t + rng.exponential(static_cast<double>(L));
    if (!(te < horizon)) {
      obs.on_interval(t, horizon, cs);
      break;
    }
    obs.on_interval(t, te, cs);
    const int site = 1 + static_cast<int>(rng.uniform_below(L));
    FlipEvent ev;
    ev.t = te;
    ev.site = site;
    ev.delta = static_cast<std::int8_t>(discrete_laplacian(s, site));
    if (ev.delta == 0) {
      ev.outcome = FlipOutcome::NoCorner;
    } else if (is_blocked(s, site)) {
      ev.outcome = FlipOutcome::Blocked;
    } else {
      ev.outcome = FlipOutcome::Flipped;
    }
    obs.on_before(ev, cs);
    if (ev.outcome == FlipOutcome::Flipped) s.h[site] += ev.delta;
    obs.on_after(ev, cs);
    if (record &&
        (ev.outcome != FlipOutcome::NoCorner || log.no_corner_rings)) {
      record->events.push_back(ev);
    }
    t = te;
  }
}

/// Samples a stationary initial profile for the truncated window: a
/// conditioned-walk path over sites 0..L+1. Declared here, defined with the
/// walk sampler.
InterfaceState stationary_initial_state(int L, RngStream& rng);

/// Writes one JSON object per Flipped/Blocked event:
/// {"t": ..., "site": ..., "delta": ..., "outcome": "flipped"|"blocked"}.
void write_events_jsonl(const EventHistory& h, const std::string& path);

/// Writes interval summaries as CSV: t_start,t_end,n_corners,n_blocked.
void write_intervals_csv(const EventHistory& h, const std::string& path);

}  // namespace wallflip
