#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "peerscout/corpus.hpp"
#include "peerscout/extract.hpp"

namespace peerscout {

struct PeerMatch {
    std::int64_t page_id = 0;
    std::string name;
    ProductSet matched;
    std::size_t count = 0;
};

ProductSet intersect(const ProductSet& a, const ProductSet& b);

// Candidates with usable predictions (ok or empty status) that share at
// least one product with the target, excluding the target itself, ordered
// by shared count descending then page id ascending.
std::vector<PeerMatch> rank_peers(std::int64_t target_page_id,
                                  const ProductSet& target_products,
                                  std::span<const ExtractionResult> candidates,
                                  std::size_t top_n);

struct NetworkEdge {
    std::int64_t a = 0;  // a < b
    std::int64_t b = 0;
    std::size_t strength = 0;
};

struct NetworkNode {
    std::int64_t page_id = 0;
    std::string name;
    std::size_t product_count = 0;
};

struct SimilarityNetwork {
    std::vector<NetworkNode> nodes;
    std::vector<NetworkEdge> edges;
};

// Undirected edges between every pair sharing at least one product;
// strength is the shared-product count. Nodes keep input order; edges are
// sorted by (a, b).
SimilarityNetwork build_network(std::span<const ExtractionResult> results);

// s(k): number of edges with strength exactly k, for every k that occurs.
std::map<std::size_t, std::size_t> strength_distribution(const SimilarityNetwork& network);

struct PowerLawFit {
    double gamma = 0.0;      // s(k) ~ k^-gamma
    double ln_c = 0.0;       // intercept of the log-log regression
    double r_squared = 0.0;
    std::size_t points = 0;
};

struct ExponentialFit {
    double rate = 0.0;       // s(k) ~ e^-rate*k
    double ln_c = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

// Least squares on (ln k, ln s(k)). Needs at least two points with k >= 1
// and s(k) >= 1; otherwise no fit.
std::optional<PowerLawFit> fit_power_law(const std::map<std::size_t, std::size_t>& distribution);

// Least squares on (k, ln s(k)), same point filter.
std::optional<ExponentialFit> fit_exponential(
    const std::map<std::size_t, std::size_t>& distribution);

std::string format_peer_table(std::span<const PeerMatch> peers);
std::string peer_line(const PeerMatch& peer);

std::string edges_csv(const SimilarityNetwork& network);
std::string distribution_csv(const std::map<std::size_t, std::size_t>& distribution);
std::string format_network_summary(const SimilarityNetwork& network,
                                   const std::map<std::size_t, std::size_t>& distribution,
                                   const std::optional<PowerLawFit>& power,
                                   const std::optional<ExponentialFit>& exponential);

}  // namespace peerscout
