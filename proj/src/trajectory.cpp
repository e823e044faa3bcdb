#include "lexsig/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "lexsig/error.hpp"
#include "lexsig/io.hpp"

namespace lexsig {

std::vector<double> Trajectory::values() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.value);
    return out;
}

void Trajectory::validate() const {
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].step <= points[i - 1].step)
            throw Error(ErrorCode::format, "trajectory steps for '" + word + "' are not strictly increasing");
    if (!points.empty() && points.back().step != total_steps)
        throw Error(ErrorCode::format, "trajectory for '" + word + "' does not end at the final step");
}

Trajectory smooth_moving_average(const Trajectory& traj, std::size_t window) {
    if (window < 1 || window % 2 == 0) throw Error(ErrorCode::usage, "smoothing window must be odd and >= 1");
    const std::size_t n = traj.points.size();
    if (window > n)
        throw Error(ErrorCode::window_too_large,
                    "window " + std::to_string(window) + " exceeds " + std::to_string(n) + " points");
    Trajectory out = traj;
    const std::size_t half = window / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n - 1, i + half);
        double sum = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) sum += traj.points[j].value;
        out.points[i].value = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

double max_spread(std::span<const double> values) {
    if (values.empty()) return 0.0;
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return *hi - *lo;
}

std::optional<std::size_t> cauchy_index(std::span<const double> values, double epsilon, std::size_t min_tail) {
    if (!(epsilon > 0.0)) throw Error(ErrorCode::usage, "epsilon must be > 0");
    if (min_tail < 1) min_tail = 1;
    const std::size_t n = values.size();
    if (n < min_tail) return std::nullopt;
    // The tail spread only grows as t moves left, so the answer is the left
    // end of the maximal suffix with spread < epsilon.
    double lo = values[n - 1], hi = values[n - 1];
    std::optional<std::size_t> best;
    for (std::size_t k = n; k-- > 0;) {
        lo = std::min(lo, values[k]);
        hi = std::max(hi, values[k]);
        if (!(hi - lo < epsilon)) break;
        if (n - k >= min_tail) best = k;
    }
    return best;
}

AoAResult extract_aoa_cauchy(const Trajectory& traj, double epsilon, std::size_t min_tail) {
    AoAResult r;
    r.word = traj.word;
    r.kind = traj.kind;
    r.seed = traj.seed;
    r.epsilon = epsilon;
    if (traj.points.size() < 2) throw Error(ErrorCode::insufficient_data, "AoA extraction needs >= 2 points");
    const auto vals = traj.values();
    if (auto idx = cauchy_index(vals, epsilon, min_tail)) {
        r.converged = true;
        r.aoa_step = traj.points[*idx].step;
        r.aoa_normalized = static_cast<double>(*idx) / static_cast<double>(vals.size() - 1);
    }
    return r;
}

std::vector<SweepCell> convergence_sweep(const std::vector<Trajectory>& trajs, const std::vector<double>& epsilons,
                                         std::size_t min_tail) {
    for (double e : epsilons)
        if (!(e > 0.0)) throw Error(ErrorCode::usage, "epsilon must be > 0");
    std::set<SignatureKind> kinds;
    for (const auto& t : trajs) kinds.insert(t.kind);
    std::vector<SweepCell> out;
    for (const auto& kind : kinds) {
        for (double eps : epsilons) {
            std::map<std::string, bool> failed;
            for (const auto& t : trajs) {
                if (t.kind != kind) continue;
                const auto vals = t.values();
                const bool ok = vals.size() >= 2 && cauchy_index(vals, eps, min_tail).has_value();
                failed[t.word] = failed[t.word] || !ok;
            }
            SweepCell cell{kind, eps, failed.size(), 0, 0.0};
            for (const auto& [w, f] : failed) cell.non_converged += f ? 1 : 0;
            cell.fraction_non_converged =
                cell.words ? static_cast<double>(cell.non_converged) / static_cast<double>(cell.words) : 0.0;
            out.push_back(cell);
        }
    }
    return out;
}

SeedAggregation aggregate_seeds(const std::vector<AoAResult>& results) {
    std::map<std::pair<SignatureKind, std::string>, std::vector<const AoAResult*>> groups;
    for (const auto& r : results) groups[{r.kind, r.word}].push_back(&r);
    SeedAggregation out;
    for (const auto& [key, rs] : groups) {
        bool all = true;
        double sum = 0.0;
        for (const auto* r : rs) {
            if (!r->converged || !r->aoa_normalized) {
                all = false;
                break;
            }
            sum += *r->aoa_normalized;
        }
        if (!all) {
            out.excluded.emplace_back(key.second, key.first);
            continue;
        }
        out.values.push_back({key.second, key.first, sum / static_cast<double>(rs.size()), rs.size()});
    }
    return out;
}

bool is_monotone(std::span<const double> values, double tolerance) {
    bool up = true, down = true;
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double d = values[i] - values[i - 1];
        if (d < -tolerance) up = false;
        if (d > tolerance) down = false;
    }
    return up || down;
}

std::vector<Trajectory> build_trajectories(const std::vector<SignatureValue>& values) {
    std::map<std::tuple<SignatureKind, std::string, std::int64_t>, Trajectory> groups;
    for (const auto& v : values) {
        auto& t = groups[{v.kind, v.word, v.seed}];
        t.word = v.word;
        t.kind = v.kind;
        t.seed = v.seed;
        t.points.push_back({v.step, v.estimate.value});
    }
    std::vector<Trajectory> out;
    for (auto& [key, t] : groups) {
        std::sort(t.points.begin(), t.points.end(), [](const auto& a, const auto& b) { return a.step < b.step; });
        t.total_steps = t.points.empty() ? 0 : t.points.back().step;
        t.validate();
        out.push_back(std::move(t));
    }
    return out;
}

void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajs) {
    out << "word,family,polarity,seed,step,value\n";
    for (const auto& t : trajs)
        for (const auto& p : t.points)
            write_csv_row(out, {t.word, family_name(t.kind.family), signature_polarity_name(t.kind.polarity),
                                std::to_string(t.seed), std::to_string(p.step), format_double(p.value)});
}

std::vector<Trajectory> read_trajectories(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    const std::string src = path.string();
    std::vector<SignatureValue> values;
    const auto cw = table.column("word"), cf = table.column("family"), cp = table.column("polarity"),
               cseed = table.column("seed"), cs = table.column("step"), cv = table.column("value");
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto ln = table.line_numbers[i];
        SignatureValue v;
        v.word = row[cw];
        try {
            v.kind = {parse_family(row[cf]), parse_signature_polarity(row[cp])};
        } catch (const Error& e) {
            throw FormatError(src, ln, e.what());
        }
        v.seed = parse_int(row[cseed], src, ln);
        v.step = parse_int(row[cs], src, ln);
        v.estimate.value = parse_double(row[cv], src, ln);
        values.push_back(std::move(v));
    }
    return build_trajectories(values);
}

void write_aoa_header(std::ostream& out) {
    out << "word,family,polarity,seed,epsilon,converged,aoa_step,aoa_normalized\n";
}

void write_aoa_row(std::ostream& out, const AoAResult& r) {
    write_csv_row(out, {r.word, family_name(r.kind.family), signature_polarity_name(r.kind.polarity),
                        std::to_string(r.seed), format_double(r.epsilon), r.converged ? "true" : "false",
                        r.aoa_step ? std::to_string(*r.aoa_step) : "",
                        r.aoa_normalized ? format_double(*r.aoa_normalized) : ""});
}

std::vector<AoAResult> read_aoa(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    const std::string src = path.string();
    const auto cw = table.column("word"), cf = table.column("family"), cp = table.column("polarity"),
               cseed = table.column("seed"), ce = table.column("epsilon"), cc = table.column("converged"),
               cs = table.column("aoa_step"), cn = table.column("aoa_normalized");
    std::vector<AoAResult> out;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto ln = table.line_numbers[i];
        AoAResult r;
        r.word = row[cw];
        try {
            r.kind = {parse_family(row[cf]), parse_signature_polarity(row[cp])};
        } catch (const Error& e) {
            throw FormatError(src, ln, e.what());
        }
        r.seed = parse_int(row[cseed], src, ln);
        r.epsilon = parse_double(row[ce], src, ln);
        if (row[cc] != "true" && row[cc] != "false") throw FormatError(src, ln, "converged must be true/false");
        r.converged = row[cc] == "true";
        if (!row[cs].empty()) r.aoa_step = parse_int(row[cs], src, ln);
        if (!row[cn].empty()) r.aoa_normalized = parse_double(row[cn], src, ln);
        if (r.converged != r.aoa_step.has_value() || r.converged != r.aoa_normalized.has_value())
            throw FormatError(src, ln, "converged flag disagrees with aoa fields");
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace lexsig
