#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lexsig/corpus.hpp"

namespace lexsig {

// Sample Pearson correlation. InsufficientData below 3 pairs or on length
// mismatch; DegenerateVariance when either side is constant.
double pearson(std::span<const double> x, std::span<const double> y);

// Average ranks (1-based), ties share the mean rank.
std::vector<double> average_ranks(std::span<const double> x);
double spearman(std::span<const double> x, std::span<const double> y);

using WordValues = std::map<std::string, double>;

struct CorrelationMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<std::optional<double>>> r;  // absent: too few shared words or constant
    std::vector<std::vector<std::size_t>> shared;
};

// Pairwise Pearson over the words present in both vectors.
CorrelationMatrix correlation_matrix(const std::vector<std::pair<std::string, WordValues>>& vectors,
                                     std::size_t min_shared = 3);

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m);

struct DesignColumn {
    std::string name;
    std::vector<double> values;
    bool indicator = false;
};

// Regression design without the intercept; ols_fit adds it.
struct DesignMatrix {
    std::vector<std::string> rows;
    std::vector<DesignColumn> columns;
    std::vector<double> response;
    std::vector<std::string> dropped;
};

struct Coefficient {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double t_value = 0.0;
    double p_value = 0.0;
};

struct RegressionReport {
    std::vector<Coefficient> coefficients;  // intercept first
    double r_squared = 0.0;
    double adj_r_squared = 0.0;
    std::size_t n = 0;
    std::size_t df_residual = 0;
    std::vector<double> residuals;
    std::vector<std::string> dropped;
    std::vector<std::pair<std::string, double>> vif;
};

// Least squares with an intercept via column-pivoted Householder QR.
RegressionReport ols_fit(const DesignMatrix& design);

// VIF of every non-indicator column, regressing it on all other columns.
std::vector<std::pair<std::string, double>> vif(const DesignMatrix& design);

// True when any VIF exceeds `limit`.
bool multicollinearity_detected(const std::vector<std::pair<std::string, double>>& vifs, double limit = 5.0);

enum class Predictor { log_frequency, concreteness, n_chars, mlu, lexical_category };

const char* predictor_name(Predictor p);
const std::vector<Predictor>& all_predictors();

// Builds a design for the words present in `aoa`. Rows with a missing
// predictor (or category `other` when the category is a predictor) go to
// `dropped`. The category expands to `noun` and `predicate` indicators,
// function words being the reference level.
DesignMatrix build_design(const WordValues& aoa, const std::map<std::string, WordFeatures>& features,
                          const std::vector<Predictor>& predictors, bool standardize = false);

// Words whose value lies more than `k` scaled median absolute deviations
// from the median (MAD scaled by 1.4826).
std::vector<std::string> mad_outliers(const WordValues& values, double k);

struct PredictorSuiteOptions {
    double outlier_mad = 3.0;  // <= 0 disables outlier removal
    std::size_t min_words = 30;
    bool standardize = false;
    double vif_limit = 5.0;
};

struct PredictorSuiteRow {
    std::string label;
    std::size_t n = 0;
    std::map<Predictor, double> single;  // adjusted R^2 per single predictor
    double full = 0.0;
    double full_minus_log_frequency = 0.0;
    RegressionReport full_report;
    bool multicollinearity = false;
    std::vector<std::string> dropped;   // incomplete features
    std::vector<std::string> outliers;  // removed before fitting
};

// One row of the predictor table: every model is fit on the same
// complete-case word subset.
PredictorSuiteRow predictor_suite(const std::string& label, const WordValues& aoa,
                                  const std::map<std::string, WordFeatures>& features,
                                  const PredictorSuiteOptions& options = {});

std::string format_regression_table(const std::vector<PredictorSuiteRow>& rows);
std::string regression_json(const std::vector<PredictorSuiteRow>& rows);

}  // namespace lexsig
