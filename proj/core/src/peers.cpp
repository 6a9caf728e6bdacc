#include "peerscout/peers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace peerscout {

using ordered_json = nlohmann::ordered_json;

ProductSet intersect(const ProductSet& a, const ProductSet& b) {
    ProductSet out;
    const ProductSet& smaller = a.size() <= b.size() ? a : b;
    const ProductSet& larger = a.size() <= b.size() ? b : a;
    for (const auto& item : smaller) {
        if (larger.contains(item)) out.insert(item);
    }
    return out;
}

namespace {

bool usable(const ExtractionResult& result) {
    return result.status == ExtractionStatus::ok ||
           result.status == ExtractionStatus::empty;
}

}  // namespace

std::vector<PeerMatch> rank_peers(std::int64_t target_page_id,
                                  const ProductSet& target_products,
                                  std::span<const ExtractionResult> candidates,
                                  std::size_t top_n) {
    std::vector<PeerMatch> peers;
    for (const auto& candidate : candidates) {
        if (candidate.page_id == target_page_id) continue;
        if (!usable(candidate)) continue;
        auto shared = intersect(target_products, candidate.predicted);
        if (shared.empty()) continue;
        PeerMatch match;
        match.page_id = candidate.page_id;
        match.name = candidate.name;
        match.count = shared.size();
        match.matched = std::move(shared);
        peers.push_back(std::move(match));
    }
    std::sort(peers.begin(), peers.end(), [](const PeerMatch& x, const PeerMatch& y) {
        if (x.count != y.count) return x.count > y.count;
        return x.page_id < y.page_id;
    });
    if (peers.size() > top_n) peers.resize(top_n);
    return peers;
}

SimilarityNetwork build_network(std::span<const ExtractionResult> results) {
    SimilarityNetwork network;
    std::vector<const ExtractionResult*> usable_results;
    for (const auto& result : results) {
        if (!usable(result)) continue;
        usable_results.push_back(&result);
        network.nodes.push_back(
            {result.page_id, result.name, result.predicted.size()});
    }
    for (std::size_t i = 0; i < usable_results.size(); ++i) {
        for (std::size_t j = i + 1; j < usable_results.size(); ++j) {
            const auto shared =
                intersect(usable_results[i]->predicted, usable_results[j]->predicted);
            if (shared.empty()) continue;
            auto a = usable_results[i]->page_id;
            auto b = usable_results[j]->page_id;
            if (a > b) std::swap(a, b);
            network.edges.push_back({a, b, shared.size()});
        }
    }
    std::sort(network.edges.begin(), network.edges.end(),
              [](const NetworkEdge& x, const NetworkEdge& y) {
                  if (x.a != y.a) return x.a < y.a;
                  return x.b < y.b;
              });
    return network;
}

std::map<std::size_t, std::size_t> strength_distribution(
    const SimilarityNetwork& network) {
    std::map<std::size_t, std::size_t> distribution;
    for (const auto& edge : network.edges) ++distribution[edge.strength];
    return distribution;
}

namespace {

struct LeastSquares {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

std::optional<LeastSquares> least_squares(const std::vector<double>& xs,
                                          const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    if (n < 2) return std::nullopt;
    double sum_x = 0.0, sum_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum_x += xs[i];
        sum_y += ys[i];
    }
    const double mean_x = sum_x / static_cast<double>(n);
    const double mean_y = sum_y / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) return std::nullopt;
    LeastSquares fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    fit.points = n;
    return fit;
}

void collect_log_points(const std::map<std::size_t, std::size_t>& distribution,
                        bool log_x, std::vector<double>& xs, std::vector<double>& ys) {
    for (const auto& [k, s] : distribution) {
        if (k < 1 || s < 1) continue;
        xs.push_back(log_x ? std::log(static_cast<double>(k))
                           : static_cast<double>(k));
        ys.push_back(std::log(static_cast<double>(s)));
    }
}

}  // namespace

std::optional<PowerLawFit> fit_power_law(
    const std::map<std::size_t, std::size_t>& distribution) {
    std::vector<double> xs, ys;
    collect_log_points(distribution, true, xs, ys);
    const auto fit = least_squares(xs, ys);
    if (!fit) return std::nullopt;
    return PowerLawFit{-fit->slope, fit->intercept, fit->r_squared, fit->points};
}

std::optional<ExponentialFit> fit_exponential(
    const std::map<std::size_t, std::size_t>& distribution) {
    std::vector<double> xs, ys;
    collect_log_points(distribution, false, xs, ys);
    const auto fit = least_squares(xs, ys);
    if (!fit) return std::nullopt;
    return ExponentialFit{-fit->slope, fit->intercept, fit->r_squared, fit->points};
}

std::string peer_line(const PeerMatch& peer) {
    ordered_json obj;
    obj["page_id"] = peer.page_id;
    if (!peer.name.empty()) obj["name"] = peer.name;
    obj["count"] = peer.count;
    obj["matched"] = ordered_json::array();
    for (const auto& item : peer.matched) obj["matched"].push_back(item);
    return obj.dump();
}

std::string format_peer_table(std::span<const PeerMatch> peers) {
    std::ostringstream out;
    out << "rank  count  page_id    company                         matched products\n";
    std::size_t rank = 1;
    for (const auto& peer : peers) {
        std::string name = peer.name.empty() ? "-" : peer.name;
        if (name.size() > 30) name.resize(30);
        char row[96];
        std::snprintf(row, sizeof(row), "%4zu  %5zu  %-9lld  %-30s  ", rank,
                      peer.count, static_cast<long long>(peer.page_id), name.c_str());
        out << row;
        bool first = true;
        for (const auto& item : peer.matched) {
            if (!first) out << ", ";
            out << item;
            first = false;
        }
        out << '\n';
        ++rank;
    }
    if (peers.empty()) out << "(no peers share a product)\n";
    return out.str();
}

std::string edges_csv(const SimilarityNetwork& network) {
    std::ostringstream out;
    out << "source,target,strength\n";
    for (const auto& edge : network.edges) {
        out << edge.a << ',' << edge.b << ',' << edge.strength << '\n';
    }
    return out.str();
}

std::string distribution_csv(const std::map<std::size_t, std::size_t>& distribution) {
    std::ostringstream out;
    out << "strength,edges\n";
    for (const auto& [k, s] : distribution) out << k << ',' << s << '\n';
    return out.str();
}

std::string format_network_summary(const SimilarityNetwork& network,
                                   const std::map<std::size_t, std::size_t>& distribution,
                                   const std::optional<PowerLawFit>& power,
                                   const std::optional<ExponentialFit>& exponential) {
    std::ostringstream out;
    out << "nodes: " << network.nodes.size() << "  edges: " << network.edges.size()
        << '\n';
    out << "strength  edges\n";
    for (const auto& [k, s] : distribution) {
        char row[48];
        std::snprintf(row, sizeof(row), "%8zu  %5zu\n", k, s);
        out << row;
    }
    if (power) {
        char row[128];
        std::snprintf(row, sizeof(row),
                      "power law fit: gamma=%.4f r2=%.4f over %zu points\n",
                      power->gamma, power->r_squared, power->points);
        out << row;
    } else {
        out << "power law fit: not enough distinct strengths\n";
    }
    if (exponential) {
        char row[128];
        std::snprintf(row, sizeof(row),
                      "exponential fit: rate=%.4f r2=%.4f over %zu points\n",
                      exponential->rate, exponential->r_squared, exponential->points);
        out << row;
    }
    return out.str();
}

}  // namespace peerscout
