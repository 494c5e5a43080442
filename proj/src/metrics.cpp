#include "fairgp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fairgp {

namespace {

bool in_mask(const std::vector<bool>& mask, std::size_t i) { return mask.empty() || mask[i]; }

// per-group (count, positives) over masked nodes; group = sensitive value
std::vector<std::pair<std::size_t, std::size_t>> group_counts(const std::vector<int>& pred,
                                                              const std::vector<int>& sensitive,
                                                              const std::vector<bool>& mask) {
    if (pred.size() != sensitive.size())
        throw std::invalid_argument("fairness metric: pred/sensitive length mismatch");
    int m = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (in_mask(mask, i)) m = std::max(m, sensitive[i] + 1);
    std::vector<std::pair<std::size_t, std::size_t>> counts(m, {0, 0});
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!in_mask(mask, i)) continue;
        ++counts[sensitive[i]].first;
        counts[sensitive[i]].second += pred[i] == 1;
    }
    return counts;
}

std::optional<std::vector<double>> group_rates(
    const std::vector<std::pair<std::size_t, std::size_t>>& counts) {
    if (counts.size() < 2) return std::nullopt;
    std::vector<double> rates;
    for (const auto& [total, pos] : counts) {
        if (total == 0) return std::nullopt;  // empty group: undefined, not 0
        rates.push_back(static_cast<double>(pos) / static_cast<double>(total));
    }
    return rates;
}

std::vector<bool> and_positive(const std::vector<bool>& mask, const std::vector<int>& labels) {
    std::vector<bool> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = in_mask(mask, i) && labels[i] == 1;
    return out;
}

double population_variance(const std::vector<double>& xs) {
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return var / static_cast<double>(xs.size());
}

}  // namespace

std::optional<double> delta_sp(const std::vector<int>& pred, const std::vector<int>& sensitive,
                               const std::vector<bool>& mask) {
    const auto rates = group_rates(group_counts(pred, sensitive, mask));
    if (!rates || rates->size() != 2) return std::nullopt;
    return std::fabs((*rates)[0] - (*rates)[1]);
}

std::optional<double> delta_eo(const std::vector<int>& pred, const std::vector<int>& labels,
                               const std::vector<int>& sensitive, const std::vector<bool>& mask) {
    if (labels.size() != pred.size())
        throw std::invalid_argument("delta_eo: pred/labels length mismatch");
    return delta_sp(pred, sensitive, and_positive(mask, labels));
}

std::optional<double> delta_sp_multi(const std::vector<int>& pred,
                                     const std::vector<int>& sensitive,
                                     const std::vector<bool>& mask) {
    const auto rates = group_rates(group_counts(pred, sensitive, mask));
    if (!rates) return std::nullopt;
    return population_variance(*rates);
}

std::optional<double> delta_eo_multi(const std::vector<int>& pred, const std::vector<int>& labels,
                                     const std::vector<int>& sensitive,
                                     const std::vector<bool>& mask) {
    if (labels.size() != pred.size())
        throw std::invalid_argument("delta_eo_multi: pred/labels length mismatch");
    return delta_sp_multi(pred, sensitive, and_positive(mask, labels));
}

std::optional<double> auc(const std::vector<double>& prob, const std::vector<int>& labels,
                          const std::vector<bool>& mask) {
    if (prob.size() != labels.size())
        throw std::invalid_argument("auc: prob/labels length mismatch");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < prob.size(); ++i)
        if (in_mask(mask, i)) idx.push_back(i);
    std::size_t n_pos = 0;
    for (std::size_t i : idx) n_pos += labels[i] == 1;
    const std::size_t n_neg = idx.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;

    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return prob[a] < prob[b]; });
    // rank sum of positives with average ranks over ties
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j < idx.size() && prob[idx[j]] == prob[idx[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t t = i; t < j; ++t)
            if (labels[idx[t]] == 1) rank_sum += avg_rank;
        i = j;
    }
    return (rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& labels,
                const std::vector<bool>& mask) {
    if (pred.size() != labels.size())
        throw std::invalid_argument("accuracy: pred/labels length mismatch");
    std::size_t total = 0, correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!in_mask(mask, i)) continue;
        ++total;
        correct += pred[i] == labels[i];
    }
    if (total == 0) throw std::invalid_argument("accuracy: empty mask");
    return static_cast<double>(correct) / static_cast<double>(total);
}

double sensitive_similarity(const DenseMatrix& a_hat, const std::vector<int>& sensitive) {
    const std::size_t n = sensitive.size();
    if (a_hat.rows() != n || a_hat.cols() != n)
        throw std::invalid_argument("sensitive_similarity: matrix must be n×n");
    double acc = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
        double av = 0.0;
        const double* row = a_hat.row(u);
        for (std::size_t v = 0; v < n; ++v) av += row[v] * static_cast<double>(sensitive[v]);
        const double diff = static_cast<double>(sensitive[u]) - av;
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

namespace {

RatioPair normalized_pair(double amount_s1, double amount_s0) {
    RatioPair p;
    if (amount_s1 <= 0.0 || amount_s0 <= 0.0) return p;  // undefined slice
    if (amount_s1 >= amount_s0) {
        p.ratio_s1 = amount_s1 / amount_s0;
        p.ratio_s0 = 1.0;
    } else {
        p.ratio_s1 = 1.0;
        p.ratio_s0 = amount_s0 / amount_s1;
    }
    return p;
}

}  // namespace

ProportionTable proportion_table(const Graph& g, const std::vector<int>& pred,
                                 std::size_t threshold) {
    const std::size_t n = g.node_count();
    if (pred.size() != n) throw std::invalid_argument("proportion_table: pred length mismatch");
    for (int s : g.sensitive())
        if (s > 1) throw std::invalid_argument("proportion_table: sensitive must be binary");

    ProportionTable table;
    double all1 = 0, all0 = 0;
    for (std::size_t i = 0; i < n; ++i) (g.sensitive()[i] == 1 ? all1 : all0) += 1.0;
    table.all_nodes = normalized_pair(all1, all0);

    double ho1 = 0, ho0 = 0;
    for (NodeId v : higher_order_nodes(g, threshold)) (g.sensitive()[v] == 1 ? ho1 : ho0) += 1.0;
    table.higher_order = normalized_pair(ho1, ho0);

    // prediction slice: conditional positive rates per group
    double pos1 = 0, pos0 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (pred[i] != 1) continue;
        (g.sensitive()[i] == 1 ? pos1 : pos0) += 1.0;
    }
    const double rate1 = all1 > 0 ? pos1 / all1 : 0.0;
    const double rate0 = all0 > 0 ? pos0 / all0 : 0.0;
    table.prediction = normalized_pair(rate1, rate0);
    return table;
}

}  // namespace fairgp
