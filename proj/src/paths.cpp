#include "sbl/paths.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sbl {

int SpinPath::eval(double t) const {
    if (t < 0.0 || t > horizon)
        throw std::out_of_range("SpinPath::eval: time outside [0, horizon]");
    const auto flips =
        std::upper_bound(jumps.begin(), jumps.end(), t) - jumps.begin();
    return (flips % 2 == 0) ? initial_sign : -initial_sign;
}

double SpinPath::time_integral() const {
    double total = 0.0;
    double prev = 0.0;
    int sign = initial_sign;
    for (double t : jumps) {
        total += sign * (t - prev);
        prev = t;
        sign = -sign;
    }
    total += sign * (horizon - prev);
    return total;
}

SpinPath sample_path(Rng& rng, double horizon) {
    if (!(horizon > 0.0))
        throw std::invalid_argument("sample_path: horizon must be positive");
    SpinPath path;
    path.horizon = horizon;
    path.initial_sign = rng.fair_sign();
    const std::uint64_t count = rng.poisson(horizon);
    path.jumps.reserve(count);
    while (path.jumps.size() < count) {
        while (path.jumps.size() < count) {
            const double u = horizon * rng.uniform01();
            if (u > 0.0) path.jumps.push_back(u);
        }
        std::sort(path.jumps.begin(), path.jumps.end());
        path.jumps.erase(std::unique(path.jumps.begin(), path.jumps.end()),
                         path.jumps.end());
    }
    return path;
}

double exact_moment(const std::vector<double>& sorted_times) {
    for (std::size_t i = 0; i < sorted_times.size(); ++i) {
        if (sorted_times[i] < 0.0)
            throw std::invalid_argument("exact_moment: negative time");
        if (i > 0 && sorted_times[i] < sorted_times[i - 1])
            throw std::invalid_argument("exact_moment: times not sorted");
    }
    if (sorted_times.size() % 2 != 0) return 0.0;
    double value = 1.0;
    for (std::size_t i = 0; i + 1 < sorted_times.size(); i += 2)
        value *= std::exp(-2.0 * (sorted_times[i + 1] - sorted_times[i]));
    return value;
}

namespace {

struct Vec2 {
    double a, b;
};

inline Vec2 apply_sigma_z(Vec2 v) { return {v.a, -v.b}; }

// e^{t sigma_x} e^{-t} = (1+e^{-2t})/2 I + (1-e^{-2t})/2 sigma_x; bounded in t.
inline Vec2 apply_scaled_exp(double t, Vec2 v) {
    const double em = std::exp(-2.0 * t);
    const double c = 0.5 * (1.0 + em);
    const double s = 0.5 * (1.0 - em);
    return {c * v.a + s * v.b, s * v.a + c * v.b};
}

} // namespace

double spin_semigroup_element(const std::array<double, 2>& alpha,
                              const std::array<double, 2>& beta,
                              const std::vector<double>& durations) {
    if (durations.empty())
        throw std::invalid_argument("spin_semigroup_element: need at least one duration");
    for (double t : durations)
        if (!(t > 0.0))
            throw std::invalid_argument("spin_semigroup_element: durations must be positive");
    Vec2 v{beta[0], beta[1]};
    v = apply_sigma_z(v);
    for (auto it = durations.rbegin(); it != durations.rend(); ++it) {
        v = apply_scaled_exp(*it, v);
        v = apply_sigma_z(v);
    }
    return alpha[0] * v.a + alpha[1] * v.b;
}

SpinFknReport verify_spin_fkn(const std::vector<double>& durations,
                              long sample_budget, Rng& rng) {
    const std::array<double, 2> e1{M_SQRT1_2, M_SQRT1_2};
    const std::array<double, 2> e2{M_SQRT1_2, -M_SQRT1_2};

    std::vector<double> s(durations.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < durations.size(); ++i) {
        acc += durations[i];
        s[i] = acc;
    }
    const double horizon = acc;

    struct Combo {
        const char* label;
        std::array<double, 2> alpha, beta;
        bool x0;   // X_0 survives (alpha = e2 squares it away)
        bool xend; // X_{s_n} survives (beta = e2 squares it away)
    };
    // The raw product is iota(alpha)(X_0) * X_0 * X_{s_1}...X_{s_n} * iota(beta)(X_{s_n});
    // squared factors drop, leaving the reduced time list built below.
    const Combo combos[4] = {
        {"e2,e2", e2, e2, false, false},
        {"e2,e1", e2, e1, false, true},
        {"e1,e1", e1, e1, true, true},
        {"e1,e2", e1, e2, true, false},
    };

    SpinFknReport report;
    for (const auto& combo : combos) {
        std::vector<double> times;
        if (combo.x0) times.push_back(0.0);
        const std::size_t keep = s.size() - (combo.xend ? 0 : 1);
        times.insert(times.end(), s.begin(), s.begin() + keep);

        const double closed = exact_moment(times);
        const double elem = spin_semigroup_element(combo.alpha, combo.beta, durations);

        double sum = 0.0, sum2 = 0.0;
        for (long i = 0; i < sample_budget; ++i) {
            const SpinPath path = sample_path(rng, horizon);
            double prod = 1.0;
            for (double t : times) prod *= path.eval(t);
            sum += prod;
            sum2 += prod * prod;
        }
        const double mean = sum / sample_budget;
        const double var =
            std::max(0.0, (sum2 / sample_budget - mean * mean)) /
            std::max<long>(1, sample_budget - 1) * sample_budget;
        const double sem = std::sqrt(var / sample_budget);
        report.rows.push_back({combo.label, elem, closed, mean, sem});
    }
    return report;
}

double SpinFknReport::max_closed_deviation() const {
    double m = 0.0;
    for (const auto& row : rows)
        m = std::max(m, std::abs(row.matrix_element - row.closed_moment));
    return m;
}

double SpinFknReport::max_mc_sigma() const {
    double m = 0.0;
    for (const auto& row : rows) {
        const double dev = std::abs(row.mc_mean - row.closed_moment);
        if (dev == 0.0) continue;
        m = std::max(m, dev / std::max(row.mc_std_error, 1e-300));
    }
    return m;
}

void save_paths_csv(std::ostream& out, const std::vector<SpinPath>& paths) {
    out << "horizon,initial_sign,n_jumps,jumps...\n";
    out.precision(17);
    for (const auto& path : paths) {
        out << path.horizon << "," << path.initial_sign << "," << path.jumps.size();
        for (double t : path.jumps) out << "," << t;
        out << "\n";
    }
}

std::vector<SpinPath> load_paths_csv(std::istream& in) {
    std::vector<SpinPath> paths;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        SpinPath path;
        char comma;
        std::size_t count = 0;
        if (!(row >> path.horizon >> comma >> path.initial_sign >> comma >> count))
            throw std::runtime_error("load_paths_csv: malformed record: " + line);
        path.jumps.resize(count);
        for (std::size_t i = 0; i < count; ++i)
            if (!(row >> comma >> path.jumps[i]))
                throw std::runtime_error("load_paths_csv: truncated record: " + line);
        paths.push_back(std::move(path));
    }
    return paths;
}

namespace {

constexpr char kPathMagic[8] = {'S', 'B', 'L', 'P', 'A', 'T', 'H', '1'};

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T take(std::istream& in) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("load_paths_binary: truncated stream");
    return value;
}

} // namespace

void save_paths_binary(std::ostream& out, const std::vector<SpinPath>& paths) {
    out.write(kPathMagic, sizeof(kPathMagic));
    put<std::uint64_t>(out, paths.size());
    for (const auto& path : paths) {
        put<double>(out, path.horizon);
        put<std::int32_t>(out, path.initial_sign);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(path.jumps.size()));
        for (double t : path.jumps) put<double>(out, t);
    }
}

std::vector<SpinPath> load_paths_binary(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kPathMagic, sizeof(magic)) != 0)
        throw std::runtime_error("load_paths_binary: bad magic");
    const auto count = take<std::uint64_t>(in);
    std::vector<SpinPath> paths;
    paths.reserve(count);
    for (std::uint64_t r = 0; r < count; ++r) {
        SpinPath path;
        path.horizon = take<double>(in);
        path.initial_sign = take<std::int32_t>(in);
        const auto n = take<std::uint32_t>(in);
        path.jumps.resize(n);
        for (std::uint32_t i = 0; i < n; ++i) path.jumps[i] = take<double>(in);
        paths.push_back(std::move(path));
    }
    return paths;
}

} // namespace sbl
