// Copyright 2026 The surfidelity Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace surfidelity {

/// Bulk critical coupling of the square-lattice Ising model, sinh(2 h_c) = 1.
inline double critical_h_real() {
    return 0.5 * std::asinh(1.0);
}

/// J-only model: the dual diagonal bonds are 2J, so J_c = h_c / 2.
inline double critical_J_nn() {
    return critical_h_real() / 2.0;
}

/// Solution of sinh^2(2h) = exp(-i theta) with Re(h) >= 0.
///
/// h = asinh(s exp(-i theta / 2)) / 2 with s = +1 on [0, pi) and s = -1 on
/// (pi, 2 pi). At theta = pi both roots +-i pi/4 have Re(h) = 0 and the one with
/// positive imaginary part is returned; the curve is continuous except for the
/// jump from -i pi/4 to +i pi/4 across theta = pi.
inline std::complex<double> critical_h_complex(double theta) {
    if (!std::isfinite(theta)) {
        throw std::invalid_argument("critical_h_complex: theta must be finite");
    }
    double t = std::fmod(theta, 2.0 * std::numbers::pi);
    if (t < 0.0) {
        t += 2.0 * std::numbers::pi;
    }
    if (t == 0.0) {
        return {critical_h_real(), 0.0};
    }
    if (t == std::numbers::pi) {
        return {0.0, std::numbers::pi / 4.0};
    }
    std::complex<double> z = std::polar(1.0, -t / 2.0);
    if (t > std::numbers::pi) {
        z = -z;
    }
    return 0.5 * std::asinh(z);
}

/// h2 on the two-value critical line for a given h1, under both readings of
/// the criterion: printed (e^{h1}-1)(e^{h2}-1) = 2 and alternative
/// (e^{2h1}-1)(e^{2h2}-1) = 2. Only the alternative reduces to critical_h_real()
/// at h1 = h2.
struct TwoValueCritical {
    double printed = 0.0;
    double alternative = 0.0;
};

inline TwoValueCritical two_value_critical(double h1) {
    if (!(h1 > 0.0)) {
        throw std::invalid_argument("two_value_critical: no solution for h1 <= 0");
    }
    TwoValueCritical out;
    out.printed = std::log1p(2.0 / std::expm1(h1));
    out.alternative = 0.5 * std::log1p(2.0 / std::expm1(2.0 * h1));
    return out;
}

/// Symmetric points h1 = h2 of the two conventions.
inline double two_value_symmetric_printed() {
    return std::log1p(std::sqrt(2.0));
}
inline double two_value_symmetric_alternative() {
    return 0.5 * std::log1p(std::sqrt(2.0));
}

enum class Scenario { homogeneous_h, homogeneous_J, complex_h, two_value, diluted, signed_random };

inline const char *to_string(Scenario s) {
    switch (s) {
        case Scenario::homogeneous_h:
            return "homogeneous_h";
        case Scenario::homogeneous_J:
            return "homogeneous_J";
        case Scenario::complex_h:
            return "complex_h";
        case Scenario::two_value:
            return "two_value";
        case Scenario::diluted:
            return "diluted";
        case Scenario::signed_random:
            return "signed_random";
    }
    return "?";
}

/// ordered_phase_exists is empty where no commitment is possible.
struct CriticalPrediction {
    Scenario scenario = Scenario::homogeneous_h;
    std::complex<double> critical_value{std::numeric_limits<double>::quiet_NaN(), 0.0};
    std::optional<bool> ordered_phase_exists;
    std::string region;
    std::string notes;

    std::string format() const {
        std::ostringstream out;
        out.precision(12);
        out << "scenario: " << to_string(scenario) << "\n";
        out << "critical_value: " << critical_value.real();
        if (critical_value.imag() != 0.0) {
            out << (critical_value.imag() < 0 ? " - " : " + ") << std::abs(critical_value.imag()) << "i";
        }
        out << "\n";
        out << "ordered_phase_exists: "
            << (ordered_phase_exists ? (*ordered_phase_exists ? "true" : "false") : "unknown") << "\n";
        if (!region.empty()) {
            out << "region: " << region << "\n";
        }
        out << "notes: " << notes << "\n";
        return out.str();
    }
};

inline CriticalPrediction predict_homogeneous_h() {
    return {Scenario::homogeneous_h, {critical_h_real(), 0.0}, true, "",
            "|h_c| = ln(1+sqrt(2))/2 from the bulk transition of the dual Ising model"};
}

inline CriticalPrediction predict_homogeneous_J() {
    return {Scenario::homogeneous_J, {critical_J_nn(), 0.0}, true, "",
            "dual diagonal coupling is 2J on two decoupled square sublattices: J_c = ln(1+sqrt(2))/4"};
}

inline CriticalPrediction predict_complex_h(double theta) {
    return {Scenario::complex_h, critical_h_complex(theta), true, "",
            "root of sinh^2(2h) = exp(-i theta) with Re(h) >= 0; branch jump at theta = pi"};
}

inline CriticalPrediction predict_two_value(double h1) {
    TwoValueCritical t = two_value_critical(h1);
    std::ostringstream notes;
    notes.precision(12);
    notes << "h2 for h1=" << h1 << ": printed convention " << t.printed << ", alternative convention "
          << t.alternative << "; symmetric points " << two_value_symmetric_printed() << " and "
          << two_value_symmetric_alternative() << " (adjudicate with a Monte Carlo crossing)";
    return {Scenario::two_value, {t.printed, 0.0}, true, "", notes.str()};
}

/// Bond dilution: each qubit's field is removed with probability d. Dual bonds
/// then percolate only for d < 1/2.
inline CriticalPrediction dilution_assessment(double d) {
    if (!(d >= 0.0 && d <= 1.0)) {
        throw std::invalid_argument("dilution must lie in [0, 1]");
    }
    CriticalPrediction p;
    p.scenario = Scenario::diluted;
    p.ordered_phase_exists = d < 0.5;
    if (d == 0.0) {
        p.critical_value = critical_h_real();
        p.notes = "no dilution: homogeneous prediction";
    } else if (d < 0.5) {
        p.notes = "dual bonds percolate (present with probability 1-d > 1/2); critical |h| exceeds the clean value, "
                  "not computed";
    } else {
        p.critical_value = std::numeric_limits<double>::infinity();
        p.notes = "at least half of the dual bonds are missing: no percolating cluster, no ordered phase, "
                  "information recoverable for any h";
    }
    return p;
}

/// Reference point used to draw the qualitative region boundaries of the
/// signed-random distribution. The defaults are the multicritical point of the
/// +-J random-bond Ising model on the square lattice (p ~ 0.109,
/// h = atanh(1 - 2p)), quoted for orientation only.
struct SignedRandomReference {
    double q_n = 0.1092;
    double h_n = 0.5 * std::log((1.0 - 0.1092) / 0.1092);
    bool user_supplied = false;
};

/// Field +h with probability q and -h otherwise. Only the minority fraction
/// p = min(q, 1-q) enters the labels.
inline CriticalPrediction classify_signed_random(double h, double q, const SignedRandomReference &ref = {}) {
    if (!(q >= 0.0 && q <= 1.0)) {
        throw std::invalid_argument("q must lie in [0, 1]");
    }
    const double p = std::min(q, 1.0 - q);
    const double ah = std::abs(h);
    CriticalPrediction out;
    out.scenario = Scenario::signed_random;
    const std::string ref_note = std::string(" [qualitative; reference point q_N=") + std::to_string(ref.q_n) +
                                 ", h_N=" + std::to_string(ref.h_n) +
                                 (ref.user_supplied ? " (user supplied)]" : " (default)]");
    if (p == 0.0) {
        out.critical_value = critical_h_real();
        out.ordered_phase_exists = true;
        out.region = "homogeneous";
        out.notes = "no sign disorder: homogeneous prediction";
    } else if (p < ref.q_n && ah < ref.h_n) {
        out.critical_value = critical_h_real();
        out.ordered_phase_exists = true;
        out.region = "clean-controlled";
        out.notes = "weak disorder, controlled by the clean fixed point: threshold falls back to the homogeneous value" +
                    ref_note;
    } else if (p > ref.q_n && ah > ref.h_n) {
        out.region = "unknown-strong-disorder";
        out.notes = "strong disorder: fixed-point physics not established, needs further investigation" + ref_note;
    } else {
        out.region = "near-Nishimori";
        out.notes = "crossover region around the disorder fixed point; no prediction" + ref_note;
    }
    return out;
}

}  // namespace surfidelity
