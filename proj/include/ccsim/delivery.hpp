#ifndef CCSIM_DELIVERY_HPP
#define CCSIM_DELIVERY_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "ccsim/model.hpp"
#include "ccsim/placement.hpp"

namespace ccsim {

struct PacketId {
    FileId file = 0;
    std::uint32_t index = 0; // 1..B within the file

    friend bool operator==(const PacketId&, const PacketId&) = default;
};

inline std::uint64_t packet_key(PacketId p) {
    return (static_cast<std::uint64_t>(p.file) << 32) | p.index;
}

// One requested packet at one user. The same packet requested by several
// users appears once per requester.
struct Vertex {
    PacketId packet;
    UserId user = 0;
};

/*
 * Conflict graph of a (cache, demand) configuration. Vertices are the
 * packets each user requests and does not hold; an edge joins two vertices
 * when they cannot share one coded transmission: they carry different
 * packets and at least one side is missing from the other requester's
 * cache. Adjacency is a packed bit matrix, which is compact for the graph
 * sizes the simulator targets (up to a few tens of thousands of vertices).
 */
class ConflictGraph {
public:
    int order() const { return static_cast<int>(verts_.size()); }
    const Vertex& vertex(int v) const { return verts_[static_cast<std::size_t>(v)]; }
    const std::vector<Vertex>& vertices() const { return verts_; }

    bool adjacent(int a, int b) const {
        return (row(a)[static_cast<std::size_t>(b) / 64] >> (b % 64)) & 1u;
    }

    int degree(int v) const { return degrees_[static_cast<std::size_t>(v)]; }
    std::size_t edge_count() const { return edges_; }

    const std::uint64_t* row(int v) const { return adj_.data() + static_cast<std::size_t>(v) * words_; }
    int row_words() const { return words_; }

    // Adjacency-list text dump: header line, one vertex line each.
    void dump_adjacency(std::ostream& os) const;

    friend ConflictGraph build_conflict_graph(const CacheConfig&, const DemandRealization&);
    friend ConflictGraph graph_from_edges(int, const std::vector<std::pair<int, int>>&);

private:
    void set_edge(int a, int b);
    void finalize_degrees();

    std::vector<Vertex> verts_;
    std::vector<std::uint64_t> adj_;
    std::vector<int> degrees_;
    int words_ = 0;
    std::size_t edges_ = 0;
};

// Builds the conflict graph for one demand realization. A user requests
// exactly the packets of its demanded file that are missing from its own
// cache, so a lone user's vertices always form a clique.
ConflictGraph build_conflict_graph(const CacheConfig& caches, const DemandRealization& demands);

// Assembles a bare graph from an explicit edge list (tests, oracles,
// synthetic coloring instances). Vertex payloads are filled with dummies.
ConflictGraph graph_from_edges(int order, const std::vector<std::pair<int, int>>& edges);

struct Coloring {
    std::vector<int> color; // 1..num_colors per vertex
    int num_colors = 0;
};

bool is_proper(const ConflictGraph& g, const Coloring& c);

enum class ColorOrder {
    DegreeDesc,     // descending degree, ties by (file, packet, user)
    Saturation,     // DSATUR
    RandomRestarts, // best of degree order, saturation, and random orders
};

struct ColoringPolicy {
    ColorOrder order = ColorOrder::DegreeDesc;
    int restarts = 16;
    std::uint64_t seed = 1;
};

Coloring greedy_color(const ConflictGraph& g, const ColoringPolicy& policy = {});

// Exact chromatic number by branch and bound over color counts. Intended
// as a test oracle; refuses graphs above the vertex cap.
int exact_chromatic(const ConflictGraph& g, int vertex_cap = 20);

using PayloadMap = std::unordered_map<std::uint64_t, std::vector<std::byte>>;

// Deterministic pseudo-random packet contents, generated on demand from
// (seed, file, packet index).
class PayloadStore {
public:
    PayloadStore(std::uint64_t seed, std::size_t symbol_bytes)
        : seed_(seed), symbol_bytes_(symbol_bytes) {}

    std::vector<std::byte> packet_payload(PacketId p) const;
    std::size_t symbol_bytes() const { return symbol_bytes_; }

    // Payloads for every distinct packet appearing in the graph.
    PayloadMap materialize(const ConflictGraph& g) const;

private:
    std::uint64_t seed_;
    std::size_t symbol_bytes_;
};

/*
 * The coded multicast: one codeword per color class, each the XOR of the
 * distinct packets in its class. A packet appearing as several vertices of
 * one class contributes once.
 */
struct MulticastCode {
    struct Codeword {
        std::vector<PacketId> packets; // distinct, sorted by key
        std::vector<std::byte> payload;
    };
    std::vector<Codeword> words;
    std::size_t symbol_bytes = 0;
};

MulticastCode encode(const ConflictGraph& g, const Coloring& coloring, const PayloadMap& payloads);

// Recovers every packet of the user's requested file that is missing from
// its cache, using the codewords plus the cached packets in `payloads`
// (only entries actually present in the user's cache are read). Throws
// decode_failure if a class cannot be resolved, which a proper coloring
// rules out.
PayloadMap decode(UserId user, const MulticastCode& code, const CacheConfig& caches,
                  const DemandRealization& demands, const PayloadMap& payloads);

// Transmission rate in file units: colors/B, capped by the naive multicast
// fallback that sends each distinct requested file once.
double delivery_rate(const ConflictGraph& g, const Coloring& coloring,
                     const DemandRealization& demands, int packets_per_file);

} // namespace ccsim

#endif
