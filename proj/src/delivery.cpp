#include "ccsim/delivery.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "ccsim/errors.hpp"

namespace ccsim {

namespace {

// Bit-matrix adjacency for a graph this dense is fine up to a few tens of
// thousands of vertices; beyond that refuse instead of thrashing.
constexpr std::size_t kAdjacencyBudgetBytes = std::size_t{1} << 31;

} // namespace

void ConflictGraph::set_edge(int a, int b) {
    adj_[static_cast<std::size_t>(a) * words_ + static_cast<std::size_t>(b) / 64] |=
        1ULL << (b % 64);
    adj_[static_cast<std::size_t>(b) * words_ + static_cast<std::size_t>(a) / 64] |=
        1ULL << (a % 64);
    ++edges_;
}

void ConflictGraph::finalize_degrees() {
    const int n = order();
    degrees_.assign(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < n; ++v) {
        int d = 0;
        const std::uint64_t* r = row(v);
        for (int w = 0; w < words_; ++w)
            d += std::popcount(r[w]);
        degrees_[static_cast<std::size_t>(v)] = d;
    }
}

void ConflictGraph::dump_adjacency(std::ostream& os) const {
    os << order() << " " << edge_count() << "\n";
    for (int v = 0; v < order(); ++v) {
        const Vertex& vx = vertex(v);
        os << v << " " << vx.packet.file << " " << vx.packet.index << " " << vx.user << ":";
        for (int u = 0; u < order(); ++u)
            if (adjacent(v, u))
                os << " " << u;
        os << "\n";
    }
}

ConflictGraph build_conflict_graph(const CacheConfig& caches, const DemandRealization& demands) {
    const SystemParams& sys = caches.params();
    if (static_cast<int>(demands.requests.size()) != sys.users)
        throw invalid_parameter("build_conflict_graph: demand vector does not match the user count");
    for (FileId f : demands.requests)
        if (f < 1 || static_cast<int>(f) > sys.files)
            throw invalid_parameter("build_conflict_graph: demand outside the library");

    ConflictGraph g;
    for (int u = 1; u <= sys.users; ++u) {
        const FileId f = demands.request(static_cast<UserId>(u));
        for (int b = 1; b <= sys.packets_per_file; ++b)
            if (!caches.contains(static_cast<UserId>(u), f, static_cast<std::uint32_t>(b)))
                g.verts_.push_back({{f, static_cast<std::uint32_t>(b)}, static_cast<UserId>(u)});
    }

    const std::size_t n = g.verts_.size();
    g.words_ = static_cast<int>((n + 63) / 64);
    const std::size_t bytes = n * static_cast<std::size_t>(g.words_) * 8;
    if (bytes > kAdjacencyBudgetBytes)
        throw sizing_error("build_conflict_graph: adjacency for " + std::to_string(n) +
                           " vertices exceeds the memory budget");
    g.adj_.assign(n * static_cast<std::size_t>(g.words_), 0);

    for (std::size_t a = 0; a < n; ++a) {
        const Vertex& va = g.verts_[a];
        for (std::size_t b = a + 1; b < n; ++b) {
            const Vertex& vb = g.verts_[b];
            if (va.packet == vb.packet)
                continue;
            if (!caches.contains(vb.user, va.packet.file, va.packet.index) ||
                !caches.contains(va.user, vb.packet.file, vb.packet.index))
                g.set_edge(static_cast<int>(a), static_cast<int>(b));
        }
    }
    g.finalize_degrees();
    return g;
}

ConflictGraph graph_from_edges(int order, const std::vector<std::pair<int, int>>& edges) {
    if (order < 0)
        throw invalid_parameter("graph_from_edges: negative order");
    ConflictGraph g;
    g.verts_.resize(static_cast<std::size_t>(order));
    for (int v = 0; v < order; ++v)
        g.verts_[static_cast<std::size_t>(v)] = {{1, static_cast<std::uint32_t>(v + 1)}, 1};
    g.words_ = static_cast<int>((static_cast<std::size_t>(order) + 63) / 64);
    g.adj_.assign(static_cast<std::size_t>(order) * g.words_, 0);
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || a >= order || b >= order || a == b)
            throw invalid_parameter("graph_from_edges: bad edge");
        if (!g.adjacent(a, b))
            g.set_edge(a, b);
    }
    g.finalize_degrees();
    return g;
}

bool is_proper(const ConflictGraph& g, const Coloring& c) {
    if (static_cast<int>(c.color.size()) != g.order())
        return false;
    for (int v = 0; v < g.order(); ++v) {
        if (c.color[static_cast<std::size_t>(v)] < 1 ||
            c.color[static_cast<std::size_t>(v)] > c.num_colors)
            return false;
        for (int u = v + 1; u < g.order(); ++u)
            if (g.adjacent(v, u) &&
                c.color[static_cast<std::size_t>(v)] == c.color[static_cast<std::size_t>(u)])
                return false;
    }
    return true;
}

namespace {

// First-fit along a fixed vertex order.
Coloring first_fit(const ConflictGraph& g, const std::vector<int>& order) {
    const int n = g.order();
    Coloring out;
    out.color.assign(static_cast<std::size_t>(n), 0);
    std::vector<int> used(static_cast<std::size_t>(n) + 2, 0);
    int stamp = 0;
    for (int v : order) {
        ++stamp;
        const std::uint64_t* r = g.row(v);
        for (int w = 0; w < g.row_words(); ++w) {
            std::uint64_t bits = r[w];
            while (bits) {
                const int nb = w * 64 + std::countr_zero(bits);
                bits &= bits - 1;
                const int c = out.color[static_cast<std::size_t>(nb)];
                if (c > 0)
                    used[static_cast<std::size_t>(c)] = stamp;
            }
        }
        int c = 1;
        while (used[static_cast<std::size_t>(c)] == stamp)
            ++c;
        out.color[static_cast<std::size_t>(v)] = c;
        out.num_colors = std::max(out.num_colors, c);
    }
    return out;
}

std::vector<int> degree_desc_order(const ConflictGraph& g) {
    std::vector<int> order(static_cast<std::size_t>(g.order()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (g.degree(a) != g.degree(b))
            return g.degree(a) > g.degree(b);
        const Vertex& va = g.vertex(a);
        const Vertex& vb = g.vertex(b);
        if (va.packet.file != vb.packet.file)
            return va.packet.file < vb.packet.file;
        if (va.packet.index != vb.packet.index)
            return va.packet.index < vb.packet.index;
        return va.user < vb.user;
    });
    return order;
}

Coloring dsatur(const ConflictGraph& g) {
    const int n = g.order();
    Coloring out;
    out.color.assign(static_cast<std::size_t>(n), 0);
    if (n == 0)
        return out;

    const std::size_t words = (static_cast<std::size_t>(n) + 2 + 63) / 64;
    std::vector<std::uint64_t> neighbor_colors(static_cast<std::size_t>(n) * words, 0);
    std::vector<int> saturation(static_cast<std::size_t>(n), 0);

    auto color_seen = [&](int v, int c) {
        return (neighbor_colors[static_cast<std::size_t>(v) * words + static_cast<std::size_t>(c) / 64] >>
                (c % 64)) &
               1u;
    };
    auto mark_color = [&](int v, int c) {
        std::uint64_t& w =
            neighbor_colors[static_cast<std::size_t>(v) * words + static_cast<std::size_t>(c) / 64];
        const std::uint64_t mask = 1ULL << (c % 64);
        if (!(w & mask)) {
            w |= mask;
            ++saturation[static_cast<std::size_t>(v)];
        }
    };

    for (int step = 0; step < n; ++step) {
        int pick = -1;
        for (int v = 0; v < n; ++v) {
            if (out.color[static_cast<std::size_t>(v)] != 0)
                continue;
            if (pick < 0 || saturation[static_cast<std::size_t>(v)] > saturation[static_cast<std::size_t>(pick)] ||
                (saturation[static_cast<std::size_t>(v)] == saturation[static_cast<std::size_t>(pick)] &&
                 g.degree(v) > g.degree(pick)))
                pick = v;
        }
        int c = 1;
        while (color_seen(pick, c))
            ++c;
        out.color[static_cast<std::size_t>(pick)] = c;
        out.num_colors = std::max(out.num_colors, c);

        const std::uint64_t* r = g.row(pick);
        for (int w = 0; w < g.row_words(); ++w) {
            std::uint64_t bits = r[w];
            while (bits) {
                const int nb = w * 64 + std::countr_zero(bits);
                bits &= bits - 1;
                if (out.color[static_cast<std::size_t>(nb)] == 0)
                    mark_color(nb, c);
            }
        }
    }
    return out;
}

} // namespace

Coloring greedy_color(const ConflictGraph& g, const ColoringPolicy& policy) {
    if (g.order() == 0)
        return Coloring{};

    switch (policy.order) {
    case ColorOrder::DegreeDesc:
        return first_fit(g, degree_desc_order(g));
    case ColorOrder::Saturation:
        return dsatur(g);
    case ColorOrder::RandomRestarts: {
        Coloring best = first_fit(g, degree_desc_order(g));
        Coloring sat = dsatur(g);
        if (sat.num_colors < best.num_colors)
            best = std::move(sat);
        std::vector<int> order(static_cast<std::size_t>(g.order()));
        std::iota(order.begin(), order.end(), 0);
        for (int i = 0; i < policy.restarts; ++i) {
            Rng rng(derive_seed(policy.seed, {kStreamColoring, static_cast<std::uint64_t>(i)}));
            for (std::size_t j = order.size(); j > 1; --j)
                std::swap(order[j - 1], order[rng.next_below(j)]);
            Coloring c = first_fit(g, order);
            if (c.num_colors < best.num_colors)
                best = std::move(c);
        }
        return best;
    }
    }
    throw invalid_parameter("greedy_color: unknown ordering policy");
}

namespace {

// k-colorability by backtracking in descending-degree order; new colors are
// opened one at a time to break color symmetry.
bool k_colorable(const ConflictGraph& g, const std::vector<int>& order, std::vector<int>& color,
                 int k, int pos, int used) {
    if (pos == static_cast<int>(order.size()))
        return true;
    const int v = order[static_cast<std::size_t>(pos)];
    const int limit = std::min(k, used + 1);
    for (int c = 1; c <= limit; ++c) {
        bool ok = true;
        const std::uint64_t* r = g.row(v);
        for (int w = 0; ok && w < g.row_words(); ++w) {
            std::uint64_t bits = r[w];
            while (bits) {
                const int nb = w * 64 + std::countr_zero(bits);
                bits &= bits - 1;
                if (color[static_cast<std::size_t>(nb)] == c) {
                    ok = false;
                    break;
                }
            }
        }
        if (!ok)
            continue;
        color[static_cast<std::size_t>(v)] = c;
        if (k_colorable(g, order, color, k, pos + 1, std::max(used, c)))
            return true;
        color[static_cast<std::size_t>(v)] = 0;
    }
    return false;
}

} // namespace

int exact_chromatic(const ConflictGraph& g, int vertex_cap) {
    if (g.order() > vertex_cap)
        throw size_limit_error("exact_chromatic: graph has " + std::to_string(g.order()) +
                               " vertices, cap is " + std::to_string(vertex_cap));
    if (g.order() == 0)
        return 0;

    const int upper = greedy_color(g, {ColorOrder::Saturation}).num_colors;
    const std::vector<int> order = degree_desc_order(g);
    std::vector<int> color(static_cast<std::size_t>(g.order()), 0);
    for (int k = 1; k < upper; ++k) {
        std::fill(color.begin(), color.end(), 0);
        if (k_colorable(g, order, color, k, 0, 0))
            return k;
    }
    return upper;
}

std::vector<std::byte> PayloadStore::packet_payload(PacketId p) const {
    Rng rng(derive_seed(seed_, {kStreamPayload, p.file, p.index}));
    std::vector<std::byte> out(symbol_bytes_);
    for (std::size_t i = 0; i < out.size(); i += 8) {
        std::uint64_t w = rng.next_u64();
        for (std::size_t j = i; j < std::min(i + 8, out.size()); ++j) {
            out[j] = static_cast<std::byte>(w & 0xff);
            w >>= 8;
        }
    }
    return out;
}

PayloadMap PayloadStore::materialize(const ConflictGraph& g) const {
    PayloadMap map;
    for (const Vertex& v : g.vertices()) {
        const std::uint64_t key = packet_key(v.packet);
        if (!map.count(key))
            map.emplace(key, packet_payload(v.packet));
    }
    return map;
}

namespace {

void xor_into(std::vector<std::byte>& acc, const std::vector<std::byte>& other) {
    for (std::size_t i = 0; i < acc.size(); ++i)
        acc[i] ^= other[i];
}

} // namespace

MulticastCode encode(const ConflictGraph& g, const Coloring& coloring, const PayloadMap& payloads) {
    if (!is_proper(g, coloring))
        throw contract_violation("encode: coloring is not proper for this graph");

    MulticastCode code;
    code.words.resize(static_cast<std::size_t>(coloring.num_colors));

    std::size_t symbol = 0;
    bool symbol_set = false;
    std::vector<std::vector<PacketId>> classes(static_cast<std::size_t>(coloring.num_colors));
    for (int v = 0; v < g.order(); ++v)
        classes[static_cast<std::size_t>(coloring.color[static_cast<std::size_t>(v)] - 1)].push_back(
            g.vertex(v).packet);

    for (std::size_t c = 0; c < classes.size(); ++c) {
        auto& pkts = classes[c];
        std::sort(pkts.begin(), pkts.end(),
                  [](PacketId a, PacketId b) { return packet_key(a) < packet_key(b); });
        pkts.erase(std::unique(pkts.begin(), pkts.end()), pkts.end());

        MulticastCode::Codeword& word = code.words[c];
        word.packets = pkts;
        for (PacketId p : pkts) {
            const auto it = payloads.find(packet_key(p));
            if (it == payloads.end())
                throw contract_violation("encode: payload missing for a requested packet");
            if (!symbol_set) {
                symbol = it->second.size();
                symbol_set = true;
            }
            if (it->second.size() != symbol)
                throw contract_violation("encode: payloads must share one symbol size");
            if (word.payload.empty())
                word.payload = it->second;
            else
                xor_into(word.payload, it->second);
        }
    }
    code.symbol_bytes = symbol;
    return code;
}

PayloadMap decode(UserId user, const MulticastCode& code, const CacheConfig& caches,
                  const DemandRealization& demands, const PayloadMap& payloads) {
    const SystemParams& sys = caches.params();
    if (user < 1 || static_cast<int>(user) > sys.users)
        throw invalid_parameter("decode: user id out of range");
    const FileId want = demands.request(user);

    // A wanted packet can show up in several classes through other users'
    // vertices; only the class holding this user's own vertex is guaranteed
    // resolvable, so unresolvable classes are skipped, not errors.
    PayloadMap recovered;
    for (const auto& word : code.words) {
        PacketId target{};
        int wanted_here = 0;
        for (PacketId p : word.packets) {
            if (p.file == want && !caches.contains(user, p.file, p.index)) {
                target = p;
                ++wanted_here;
            }
        }
        if (wanted_here != 1)
            continue;
        bool resolvable = true;
        for (PacketId p : word.packets)
            if (!(p == target) && !caches.contains(user, p.file, p.index)) {
                resolvable = false;
                break;
            }
        if (!resolvable || recovered.count(packet_key(target)))
            continue;

        std::vector<std::byte> acc = word.payload;
        for (PacketId p : word.packets) {
            if (p == target)
                continue;
            xor_into(acc, payloads.at(packet_key(p)));
        }
        recovered.emplace(packet_key(target), std::move(acc));
    }

    // properness guarantees each missing packet's own class resolved it
    for (int b = 1; b <= sys.packets_per_file; ++b) {
        if (caches.contains(user, want, static_cast<std::uint32_t>(b)))
            continue;
        if (!recovered.count(packet_key({want, static_cast<std::uint32_t>(b)})))
            throw decode_failure("decode: packet " + std::to_string(want) + "/" +
                                 std::to_string(b) + " unresolvable at user " +
                                 std::to_string(user));
    }
    return recovered;
}

double delivery_rate(const ConflictGraph& g, const Coloring& coloring,
                     const DemandRealization& demands, int packets_per_file) {
    if (packets_per_file < 1)
        throw invalid_parameter("delivery_rate: packets_per_file must be >= 1");
    if (!is_proper(g, coloring))
        throw contract_violation("delivery_rate: coloring is not proper for this graph");
    const double coded = static_cast<double>(coloring.num_colors) / packets_per_file;
    const double naive = static_cast<double>(distinct_file_count(demands));
    return std::min(coded, naive);
}

} // namespace ccsim
