#pragma once

#include <string>

#include "delvar/errors.hpp"

namespace delvar {

/// Trajectory symbol kinds. `costate_dot` never appears in user input; it is
/// introduced by the costate equations so the verifier can finite-difference
/// p(t) and substitute.
enum class SymKind {
  time,        // t
  state,       // q_i
  state_dot,   // dq_i
  state_ddot,  // ddq_i
  control,     // u_j
  costate,     // p_i
  costate_dot  // dp_i
};

/// A time-shifted trajectory symbol. The evaluation instant is t + offset*tau
/// (0 current, -1 delayed, +1 advanced). The time symbol itself carries no
/// index and no offset; shifts of t are expressed arithmetically as t + k*tau.
struct Symbol {
  SymKind kind = SymKind::time;
  int index = 0;   // component index, >= 1 except for time
  int offset = 0;  // multiple of the delay

  static Symbol time() { return Symbol{SymKind::time, 0, 0}; }
  static Symbol make(SymKind kind, int index, int offset = 0) {
    if (kind == SymKind::time) return time();
    return Symbol{kind, index, offset};
  }

  bool is_time() const { return kind == SymKind::time; }

  /// Offsets sort 0, -1, +1, -2, +2 so that current-time symbols render first.
  static int offset_rank(int offset) {
    if (offset == 0) return 0;
    return offset < 0 ? -2 * offset - 1 : 2 * offset;
  }

  static int compare(const Symbol& a, const Symbol& b) {
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind) ? -1 : 1;
    if (a.index != b.index) return a.index < b.index ? -1 : 1;
    int ra = offset_rank(a.offset), rb = offset_rank(b.offset);
    if (ra != rb) return ra < rb ? -1 : 1;
    return 0;
  }

  friend bool operator==(const Symbol& a, const Symbol& b) {
    return a.kind == b.kind && a.index == b.index && a.offset == b.offset;
  }
  friend bool operator<(const Symbol& a, const Symbol& b) { return compare(a, b) < 0; }

  std::string name() const {
    if (kind == SymKind::time) return "t";
    std::string base;
    switch (kind) {
      case SymKind::state: base = "q"; break;
      case SymKind::state_dot: base = "dq"; break;
      case SymKind::state_ddot: base = "ddq"; break;
      case SymKind::control: base = "u"; break;
      case SymKind::costate: base = "p"; break;
      case SymKind::costate_dot: base = "dp"; break;
      default: base = "t"; break;
    }
    base += std::to_string(index);
    if (offset == -1) base += "_tau";
    else if (offset == 1) base += "_adv";
    else if (offset < -1) base += "_tau" + std::to_string(-offset);
    else if (offset > 1) base += "_adv" + std::to_string(offset);
    return base;
  }
};

}  // namespace delvar
