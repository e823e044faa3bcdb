#include "lexsig/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "json.hpp"
#include "lexsig/error.hpp"
#include "lexsig/io.hpp"
#include "lexsig/stats.hpp"

namespace lexsig {

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(ErrorCode::insufficient_data, "pearson: vectors differ in length");
    const std::size_t n = x.size();
    if (n < 3) throw Error(ErrorCode::insufficient_data, "pearson needs at least 3 pairs");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw Error(ErrorCode::degenerate_variance, "pearson: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    auto rx = average_ranks(x);
    auto ry = average_ranks(y);
    return pearson(rx, ry);
}

CorrelationMatrix correlation_matrix(const std::vector<std::pair<std::string, WordValues>>& vectors,
                                     std::size_t min_shared) {
    CorrelationMatrix m;
    const std::size_t k = vectors.size();
    for (const auto& [label, v] : vectors) m.labels.push_back(label);
    m.r.assign(k, std::vector<std::optional<double>>(k));
    m.shared.assign(k, std::vector<std::size_t>(k, 0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            std::vector<double> a, b;
            for (const auto& [word, val] : vectors[i].second) {
                auto it = vectors[j].second.find(word);
                if (it == vectors[j].second.end()) continue;
                a.push_back(val);
                b.push_back(it->second);
            }
            m.shared[i][j] = m.shared[j][i] = a.size();
            std::optional<double> r;
            if (a.size() >= min_shared && a.size() >= 3) {
                try {
                    r = i == j ? 1.0 : pearson(a, b);
                    if (i == j) pearson(a, b);  // constant vectors have no defined correlation
                } catch (const Error&) {
                    r.reset();
                }
            }
            m.r[i][j] = m.r[j][i] = r;
        }
    }
    return m;
}

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m) {
    std::vector<std::string> header{""};
    header.insert(header.end(), m.labels.begin(), m.labels.end());
    write_csv_row(out, header);
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        std::vector<std::string> row{m.labels[i]};
        for (std::size_t j = 0; j < m.labels.size(); ++j) row.push_back(m.r[i][j] ? format_double(*m.r[i][j]) : "");
        write_csv_row(out, row);
    }
}

namespace {

struct Fit {
    Eigen::VectorXd beta;
    Eigen::MatrixXd cov_unscaled;  // (X'X)^-1
    Eigen::VectorXd residuals;
    double rss = 0.0;
    double tss = 0.0;
};

Fit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols()) throw Error(ErrorCode::rank_deficient, "design matrix is rank deficient");
    Fit f;
    f.beta = qr.solve(y);
    f.residuals = y - X * f.beta;
    f.rss = f.residuals.squaredNorm();
    f.tss = (y.array() - y.mean()).square().sum();

    const Eigen::Index p = X.cols();
    Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    Eigen::MatrixXd cov_perm = Rinv * Rinv.transpose();
    const auto& perm = qr.colsPermutation();
    f.cov_unscaled = perm * cov_perm * perm.transpose();
    return f;
}

Eigen::MatrixXd with_intercept(const DesignMatrix& d, std::size_t skip = static_cast<std::size_t>(-1)) {
    const auto n = static_cast<Eigen::Index>(d.rows.size());
    Eigen::Index cols = 1;
    for (std::size_t j = 0; j < d.columns.size(); ++j)
        if (j != skip) ++cols;
    Eigen::MatrixXd X(n, cols);
    X.col(0).setOnes();
    Eigen::Index c = 1;
    for (std::size_t j = 0; j < d.columns.size(); ++j) {
        if (j == skip) continue;
        if (d.columns[j].values.size() != d.rows.size())
            throw Error(ErrorCode::insufficient_data, "design column '" + d.columns[j].name + "' has wrong length");
        for (Eigen::Index i = 0; i < n; ++i) X(i, c) = d.columns[j].values[static_cast<std::size_t>(i)];
        ++c;
    }
    return X;
}

double r_squared(const Fit& f) { return f.tss > 0.0 ? 1.0 - f.rss / f.tss : 0.0; }

}  // namespace

RegressionReport ols_fit(const DesignMatrix& design) {
    const std::size_t n = design.rows.size();
    const std::size_t p = design.columns.size();
    if (design.response.size() != n) throw Error(ErrorCode::insufficient_data, "response length differs from rows");
    if (n <= p + 1)
        throw Error(ErrorCode::insufficient_data,
                    "need more than " + std::to_string(p + 1) + " rows, have " + std::to_string(n));
    const auto X = with_intercept(design);
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(design.response.data(), static_cast<Eigen::Index>(n));
    const auto fit = least_squares(X, y);

    RegressionReport rep;
    rep.n = n;
    rep.df_residual = n - p - 1;
    rep.r_squared = r_squared(fit);
    rep.adj_r_squared =
        1.0 - (1.0 - rep.r_squared) * static_cast<double>(n - 1) / static_cast<double>(rep.df_residual);
    rep.dropped = design.dropped;
    rep.residuals.assign(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
    const double sigma2 = fit.rss / static_cast<double>(rep.df_residual);
    for (std::size_t j = 0; j <= p; ++j) {
        Coefficient c;
        c.name = j == 0 ? "(Intercept)" : design.columns[j - 1].name;
        c.estimate = fit.beta(static_cast<Eigen::Index>(j));
        c.std_error = std::sqrt(sigma2 * fit.cov_unscaled(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
        if (c.std_error > 0.0) {
            c.t_value = c.estimate / c.std_error;
            c.p_value = student_t_two_sided_p(c.t_value, static_cast<double>(rep.df_residual));
        } else {
            // exact fit: the coefficient is determined without error
            c.t_value = c.estimate == 0.0 ? 0.0 : std::copysign(INFINITY, c.estimate);
            c.p_value = c.estimate == 0.0 ? 1.0 : 0.0;
        }
        rep.coefficients.push_back(c);
    }
    std::size_t continuous = 0;
    for (const auto& col : design.columns) continuous += col.indicator ? 0 : 1;
    if (continuous >= 2) rep.vif = vif(design);
    return rep;
}

std::vector<std::pair<std::string, double>> vif(const DesignMatrix& design) {
    std::size_t continuous = 0;
    for (const auto& col : design.columns) continuous += col.indicator ? 0 : 1;
    if (continuous < 2) throw Error(ErrorCode::insufficient_data, "VIF needs at least two non-indicator columns");
    const std::size_t n = design.rows.size();
    if (n <= design.columns.size())
        throw Error(ErrorCode::insufficient_data, "too few rows for VIF regressions");
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t j = 0; j < design.columns.size(); ++j) {
        if (design.columns[j].indicator) continue;
        const auto X = with_intercept(design, j);
        const Eigen::VectorXd y =
            Eigen::Map<const Eigen::VectorXd>(design.columns[j].values.data(), static_cast<Eigen::Index>(n));
        // the full design must be of full rank for the VIFs to be finite
        const auto fit = least_squares(X, y);
        const double r2 = r_squared(fit);
        if (!(r2 < 1.0 - 1e-12))
            throw Error(ErrorCode::rank_deficient, "column '" + design.columns[j].name + "' is collinear");
        out.emplace_back(design.columns[j].name, 1.0 / (1.0 - r2));
    }
    return out;
}

bool multicollinearity_detected(const std::vector<std::pair<std::string, double>>& vifs, double limit) {
    return std::any_of(vifs.begin(), vifs.end(), [&](const auto& v) { return v.second > limit; });
}

const char* predictor_name(Predictor p) {
    switch (p) {
    case Predictor::log_frequency: return "log_frequency";
    case Predictor::concreteness: return "concreteness";
    case Predictor::n_chars: return "n_chars";
    case Predictor::mlu: return "mlu";
    case Predictor::lexical_category: return "lexical_category";
    }
    return "?";
}

const std::vector<Predictor>& all_predictors() {
    static const std::vector<Predictor> preds{Predictor::log_frequency, Predictor::concreteness, Predictor::n_chars,
                                              Predictor::mlu, Predictor::lexical_category};
    return preds;
}

namespace {

std::optional<double> continuous_value(const WordFeatures& f, Predictor p) {
    switch (p) {
    case Predictor::log_frequency:
        return std::isfinite(f.log_frequency) ? std::optional<double>(f.log_frequency) : std::nullopt;
    case Predictor::concreteness: return f.concreteness;
    case Predictor::n_chars: return static_cast<double>(f.n_chars);
    case Predictor::mlu: return f.mlu;
    case Predictor::lexical_category: return std::nullopt;
    }
    return std::nullopt;
}

bool complete(const WordFeatures& f, const std::vector<Predictor>& predictors) {
    for (auto p : predictors) {
        if (p == Predictor::lexical_category) {
            if (f.lexical_category == LexicalCategory::other) return false;
        } else if (!continuous_value(f, p)) {
            return false;
        }
    }
    return true;
}

void standardize_column(DesignColumn& col) {
    const double n = static_cast<double>(col.values.size());
    if (n < 2) return;
    const double mean = std::accumulate(col.values.begin(), col.values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : col.values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    for (double& v : col.values) v = sd > 0.0 ? (v - mean) / sd : 0.0;
}

}  // namespace

DesignMatrix build_design(const WordValues& aoa, const std::map<std::string, WordFeatures>& features,
                          const std::vector<Predictor>& predictors, bool standardize) {
    DesignMatrix d;
    std::vector<const WordFeatures*> rows;
    for (const auto& [word, value] : aoa) {
        auto it = features.find(word);
        if (it == features.end() || !complete(it->second, predictors)) {
            d.dropped.push_back(word);
            continue;
        }
        d.rows.push_back(word);
        d.response.push_back(value);
        rows.push_back(&it->second);
    }
    for (auto p : predictors) {
        if (p == Predictor::lexical_category) {
            DesignColumn noun{"noun", {}, true}, pred{"predicate", {}, true};
            for (const auto* f : rows) {
                noun.values.push_back(f->lexical_category == LexicalCategory::noun ? 1.0 : 0.0);
                pred.values.push_back(f->lexical_category == LexicalCategory::predicate ? 1.0 : 0.0);
            }
            d.columns.push_back(std::move(noun));
            d.columns.push_back(std::move(pred));
            continue;
        }
        DesignColumn col{predictor_name(p), {}, false};
        for (const auto* f : rows) col.values.push_back(*continuous_value(*f, p));
        if (standardize) standardize_column(col);
        d.columns.push_back(std::move(col));
    }
    return d;
}

std::vector<std::string> mad_outliers(const WordValues& values, double k) {
    std::vector<std::string> out;
    if (values.size() < 3 || !(k > 0.0)) return out;
    std::vector<double> v;
    for (const auto& [w, x] : values) v.push_back(x);
    auto median = [](std::vector<double> xs) {
        std::sort(xs.begin(), xs.end());
        const std::size_t n = xs.size();
        return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
    };
    const double med = median(v);
    std::vector<double> dev;
    for (double x : v) dev.push_back(std::abs(x - med));
    const double mad = 1.4826 * median(dev);
    if (!(mad > 0.0)) return out;
    for (const auto& [w, x] : values)
        if (std::abs(x - med) > k * mad) out.push_back(w);
    return out;
}

PredictorSuiteRow predictor_suite(const std::string& label, const WordValues& aoa,
                                  const std::map<std::string, WordFeatures>& features,
                                  const PredictorSuiteOptions& options) {
    PredictorSuiteRow row;
    row.label = label;
    WordValues kept = aoa;
    if (options.outlier_mad > 0.0) {
        row.outliers = mad_outliers(aoa, options.outlier_mad);
        for (const auto& w : row.outliers) kept.erase(w);
    }
    const auto& preds = all_predictors();
    // shared complete-case subset
    auto full = build_design(kept, features, preds, options.standardize);
    row.dropped = full.dropped;
    row.n = full.rows.size();
    if (row.n < options.min_words)
        throw Error(ErrorCode::insufficient_data, label + ": " + std::to_string(row.n) + " complete words, need " +
                                                       std::to_string(options.min_words));
    WordValues subset;
    for (std::size_t i = 0; i < full.rows.size(); ++i) subset.emplace(full.rows[i], full.response[i]);

    for (auto p : preds) row.single[p] = ols_fit(build_design(subset, features, {p}, options.standardize)).adj_r_squared;
    row.full_report = ols_fit(full);
    row.full_report.dropped = row.dropped;
    row.full = row.full_report.adj_r_squared;
    std::vector<Predictor> reduced(preds.begin() + 1, preds.end());
    row.full_minus_log_frequency = ols_fit(build_design(subset, features, reduced, options.standardize)).adj_r_squared;
    row.multicollinearity = multicollinearity_detected(row.full_report.vif, options.vif_limit);
    return row;
}

std::string format_regression_table(const std::vector<PredictorSuiteRow>& rows) {
    std::ostringstream out;
    const char* cols[] = {"AoA type", "#words", "Log freq.", "Conc.", "#chars", "MLU", "Lex. cat.", "Full",
                          "Full \\ Log freq."};
    out << std::left << std::setw(12) << cols[0];
    for (int i = 1; i < 9; ++i) out << std::right << std::setw(i == 8 ? 18 : 11) << cols[i];
    out << '\n';
    out << std::fixed << std::setprecision(3);
    for (const auto& r : rows) {
        out << std::left << std::setw(12) << r.label << std::right << std::setw(11) << r.n;
        for (auto p : all_predictors()) out << std::setw(11) << r.single.at(p);
        out << std::setw(11) << r.full << std::setw(18) << r.full_minus_log_frequency << '\n';
    }
    return out.str();
}

std::string regression_json(const std::vector<PredictorSuiteRow>& rows) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["aoa_type"] = r.label;
        j["n_words"] = r.n;
        nlohmann::ordered_json single;
        for (auto p : all_predictors()) single[predictor_name(p)] = r.single.at(p);
        j["single_predictor_adj_r2"] = single;
        j["full_adj_r2"] = r.full;
        j["full_minus_log_frequency_adj_r2"] = r.full_minus_log_frequency;
        nlohmann::ordered_json coefs = nlohmann::ordered_json::array();
        for (const auto& c : r.full_report.coefficients)
            coefs.push_back({{"name", c.name},
                             {"estimate", c.estimate},
                             {"std_error", c.std_error},
                             {"t_value", c.t_value},
                             {"p_value", c.p_value}});
        j["full_model"] = {{"r2", r.full_report.r_squared},
                           {"adj_r2", r.full_report.adj_r_squared},
                           {"df_residual", r.full_report.df_residual},
                           {"coefficients", coefs}};
        nlohmann::ordered_json v;
        for (const auto& [name, value] : r.full_report.vif) v[name] = value;
        j["vif"] = v;
        j["multicollinearity"] = r.multicollinearity;
        j["dropped_incomplete"] = r.dropped;
        j["outliers_removed"] = r.outliers;
        arr.push_back(j);
    }
    return arr.dump(2);
}

}  // namespace lexsig
