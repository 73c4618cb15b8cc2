// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eggp Authors

#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include "eggp/egraph.hpp"

// Binary e-graph file ("EGG1"):
//
//   magic "EGG1" | u32 version
//   u64 id_bound      | id_bound x u32 canonical representative
//   u64 class_count   | class_count x (u32 id, u32 node_count)
//   u64 node_count    | node_count x (u32 class, symbol, u8 arity, arity x u32 child)
//   u64 root_count    | root_count x u32
//   u64 eval_count    | eval_count x (u32 root, f64 fitness, u32 n, n x f64 param, string expr)
//   u64 pending_count | pending_count x u32
//
// All integers little-endian, fixed width. f64 is the IEEE-754 bit pattern
// as a u64. A symbol and a string are a u16 / u32 byte length followed by
// text: "x<k>" for variables, "t" for the parameter, a decimal literal for
// constants and the operator name otherwise.

namespace eggp {

class EGraphFormatError : public std::runtime_error {
public:
    EGraphFormatError(std::string const& what, std::size_t offset)
        : std::runtime_error("e-graph file: " + what + " at offset " + std::to_string(offset))
        , offset_(offset)
    {
    }

    [[nodiscard]] auto offset() const noexcept -> std::size_t { return offset_; }

private:
    std::size_t offset_;
};

namespace detail {

    inline constexpr std::string_view egraph_magic = "EGG1";
    inline constexpr std::uint32_t egraph_version = 1;

    class ByteWriter {
    public:
        template <typename T>
        void put(T v)
        {
            auto u = static_cast<std::uint64_t>(v);
            for (std::size_t i = 0; i < sizeof(T); ++i) {
                out_.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
            }
        }
        void put_f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
        void put_raw(std::string_view s) { out_.append(s); }
        void put_symbol(std::string_view s)
        {
            put(static_cast<std::uint16_t>(s.size()));
            put_raw(s);
        }
        void put_string(std::string_view s)
        {
            put(static_cast<std::uint32_t>(s.size()));
            put_raw(s);
        }
        auto take() -> std::string { return std::move(out_); }

    private:
        std::string out_;
    };

    class ByteReader {
    public:
        explicit ByteReader(std::string_view in)
            : in_(in)
        {
        }

        template <typename T>
        auto get() -> T
        {
            need(sizeof(T));
            std::uint64_t u = 0;
            for (std::size_t i = 0; i < sizeof(T); ++i) {
                u |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
            }
            pos_ += sizeof(T);
            return static_cast<T>(u);
        }
        auto get_f64() -> double { return std::bit_cast<double>(get<std::uint64_t>()); }
        auto get_raw(std::size_t n) -> std::string_view
        {
            need(n);
            auto s = in_.substr(pos_, n);
            pos_ += n;
            return s;
        }
        auto get_symbol() -> std::string_view { return get_raw(get<std::uint16_t>()); }
        auto get_string() -> std::string_view { return get_raw(get<std::uint32_t>()); }
        // Counts are bounded by the bytes left so a corrupt header cannot force a huge allocation.
        auto get_count(std::size_t min_record) -> std::size_t
        {
            auto at = pos_;
            auto n = get<std::uint64_t>();
            if (min_record > 0 && n > (in_.size() - pos_) / min_record) {
                throw EGraphFormatError("count " + std::to_string(n) + " exceeds remaining data", at);
            }
            return static_cast<std::size_t>(n);
        }
        [[nodiscard]] auto offset() const noexcept -> std::size_t { return pos_; }
        [[nodiscard]] auto done() const noexcept -> bool { return pos_ == in_.size(); }

    private:
        void need(std::size_t n) const
        {
            if (in_.size() - pos_ < n) {
                throw EGraphFormatError("truncated data", pos_);
            }
        }

        std::string_view in_;
        std::size_t pos_ { 0 };
    };

    inline auto symbol_text(Symbol const& s) -> std::string
    {
        switch (s.op) {
        case Op::Var: return "x" + std::to_string(s.var);
        case Op::Param: return "t";
        case Op::Const: return format_number(s.value);
        default: return std::string(op_name(s.op));
        }
    }

    inline auto symbol_from_text(std::string_view t, std::size_t offset) -> Symbol
    {
        if (t == "t") {
            return Symbol::param();
        }
        if (t.size() > 1 && t[0] == 'x') {
            std::uint32_t k {};
            auto [p, ec] = std::from_chars(t.data() + 1, t.data() + t.size(), k);
            if (ec == std::errc {} && p == t.data() + t.size()) {
                return Symbol::variable(k);
            }
        }
        if (!t.empty() && (t[0] == '-' || t[0] == '.' || (t[0] >= '0' && t[0] <= '9'))) {
            double v {};
            auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (ec == std::errc {} && p == t.data() + t.size() && std::isfinite(v)) {
                return Symbol::constant(v);
            }
        }
        try {
            auto op = parse_op_name(t);
            if (!is_terminal(op)) {
                return Symbol::of(op);
            }
        } catch (std::invalid_argument const&) {
        }
        throw EGraphFormatError("unknown symbol '" + std::string(t) + "'", offset);
    }

    struct EGraphCodec {
        static auto encode(EGraph const& g) -> std::string
        {
            if (g.needs_rebuild()) {
                throw std::logic_error("serialize: e-graph has pending merges; call rebuild() first");
            }
            ByteWriter w;
            w.put_raw(egraph_magic);
            w.put(egraph_version);

            w.put(static_cast<std::uint64_t>(g.parent_.size()));
            for (std::uint32_t i = 0; i < g.parent_.size(); ++i) {
                w.put(g.find(EClassId { i }).value);
            }

            auto ids = g.class_ids();
            w.put(static_cast<std::uint64_t>(ids.size()));
            std::size_t nodes = 0;
            for (auto id : ids) {
                w.put(id.value);
                w.put(static_cast<std::uint32_t>(g.classes_[id.value].nodes.size()));
                nodes += g.classes_[id.value].nodes.size();
            }

            w.put(static_cast<std::uint64_t>(nodes));
            for (auto id : ids) {
                for (auto const& n : g.classes_[id.value].nodes) {
                    w.put(id.value);
                    w.put_symbol(symbol_text(n.sym));
                    w.put(static_cast<std::uint8_t>(n.arity()));
                    for (auto kid : n.children()) {
                        w.put(g.find(kid).value);
                    }
                }
            }

            w.put(static_cast<std::uint64_t>(g.roots_.size()));
            for (auto r : g.roots_) {
                w.put(g.find(r).value);
            }

            w.put(static_cast<std::uint64_t>(g.evaluations_.size()));
            for (auto const& ev : g.evaluations_) {
                w.put(g.find(ev.root).value);
                w.put_f64(ev.fitness);
                w.put(static_cast<std::uint32_t>(ev.params.size()));
                for (auto p : ev.params) {
                    w.put_f64(p);
                }
                w.put_string(to_string(ev.expr));
            }

            std::vector<EClassId> pending;
            for (auto t : g.touched_) {
                pending.push_back(g.find(t));
            }
            std::sort(pending.begin(), pending.end());
            pending.erase(std::unique(pending.begin(), pending.end()), pending.end());
            w.put(static_cast<std::uint64_t>(pending.size()));
            for (auto t : pending) {
                w.put(t.value);
            }
            return w.take();
        }

        static auto decode(std::string_view bytes) -> EGraph
        {
            ByteReader r(bytes);
            if (bytes.size() < egraph_magic.size() || r.get_raw(egraph_magic.size()) != egraph_magic) {
                throw EGraphFormatError("bad magic (expected \"EGG1\")", 0);
            }
            auto version_at = r.offset();
            if (auto v = r.get<std::uint32_t>(); v != egraph_version) {
                throw EGraphFormatError("unsupported version " + std::to_string(v), version_at);
            }

            EGraph g;
            auto bound = r.get_count(4);
            if (bound > std::numeric_limits<std::uint32_t>::max()) {
                throw EGraphFormatError("id space too large", r.offset());
            }
            g.parent_.resize(bound);
            g.classes_.resize(bound);
            auto check = [&](std::uint32_t id, std::size_t at) {
                if (id >= bound) {
                    throw EGraphFormatError("class id " + std::to_string(id) + " out of range", at);
                }
            };
            for (std::size_t i = 0; i < bound; ++i) {
                auto at = r.offset();
                auto rep = r.get<std::uint32_t>();
                check(rep, at);
                g.parent_[i] = rep;
            }
            for (std::size_t i = 0; i < bound; ++i) {
                if (g.parent_[g.parent_[i]] != g.parent_[i]) {
                    throw EGraphFormatError("union-find table is not flattened", 12);
                }
            }

            auto class_count = r.get_count(8);
            std::vector<std::pair<std::uint32_t, std::uint32_t>> table;
            for (std::size_t i = 0; i < class_count; ++i) {
                auto at = r.offset();
                auto id = r.get<std::uint32_t>();
                check(id, at);
                if (g.parent_[id] != id) {
                    throw EGraphFormatError("class " + std::to_string(id) + " is not canonical", at);
                }
                table.emplace_back(id, r.get<std::uint32_t>());
                g.classes_[id].alive = true;
            }
            g.class_count_ = class_count;

            auto node_count = r.get_count(8);
            for (std::size_t i = 0; i < node_count; ++i) {
                auto at = r.offset();
                auto cls = r.get<std::uint32_t>();
                check(cls, at);
                if (!g.classes_[cls].alive) {
                    throw EGraphFormatError("e-node refers to unknown class " + std::to_string(cls), at);
                }
                auto sym_at = r.offset();
                auto sym = symbol_from_text(r.get_symbol(), sym_at);
                auto arity_at = r.offset();
                auto k = r.get<std::uint8_t>();
                if (k != sym.arity()) {
                    throw EGraphFormatError("arity mismatch", arity_at);
                }
                ENode n { sym, {} };
                for (std::size_t c = 0; c < k; ++c) {
                    auto kat = r.offset();
                    auto kid = r.get<std::uint32_t>();
                    check(kid, kat);
                    if (!g.classes_[g.parent_[kid]].alive) {
                        throw EGraphFormatError("child refers to unknown class", kat);
                    }
                    n.kids[c] = EClassId { g.parent_[kid] };
                }
                g.classes_[cls].nodes.push_back(n);
            }
            g.node_count_ = node_count;
            for (auto [id, count] : table) {
                if (g.classes_[id].nodes.size() != count) {
                    throw EGraphFormatError("node table does not match class table for class " + std::to_string(id), r.offset());
                }
            }

            auto roots = r.get_count(4);
            for (std::size_t i = 0; i < roots; ++i) {
                auto at = r.offset();
                auto id = r.get<std::uint32_t>();
                check(id, at);
                g.roots_.push_back(EClassId { id });
            }

            auto evals = r.get_count(20);
            for (std::size_t i = 0; i < evals; ++i) {
                auto at = r.offset();
                Evaluation ev;
                auto id = r.get<std::uint32_t>();
                check(id, at);
                ev.root = EClassId { id };
                ev.fitness = r.get_f64();
                auto np = r.get<std::uint32_t>();
                for (std::uint32_t p = 0; p < np; ++p) {
                    ev.params.push_back(r.get_f64());
                }
                auto text_at = r.offset();
                auto text = r.get_string();
                try {
                    ev.expr = parse(text);
                } catch (std::invalid_argument const& e) {
                    throw EGraphFormatError(std::string("bad expression: ") + e.what(), text_at);
                }
                if (ev.expr.slot_count() != ev.params.size()) {
                    throw EGraphFormatError("parameter count does not match expression", text_at);
                }
                g.evaluations_.push_back(std::move(ev));
            }

            auto pending = r.get_count(4);
            for (std::size_t i = 0; i < pending; ++i) {
                auto at = r.offset();
                auto id = r.get<std::uint32_t>();
                check(id, at);
                g.touched_.push_back(EClassId { id });
            }
            if (!r.done()) {
                throw EGraphFormatError("trailing bytes", r.offset());
            }

            // derived state: hash-cons, parent lists, size analysis
            std::vector<EClassId> all;
            for (auto [id, count] : table) {
                auto cid = EClassId { id };
                all.push_back(cid);
                auto& cls = g.classes_[id];
                for (auto const& n : cls.nodes) {
                    if (!g.memo_.emplace(n, cid).second) {
                        throw EGraphFormatError("duplicate e-node across classes", r.offset());
                    }
                    for (auto kid : n.children()) {
                        g.classes_[kid.value].parents.emplace_back(n, cid);
                    }
                }
                cls.smallest_size = std::numeric_limits<std::size_t>::max();
            }
            g.propagate_sizes(all);
            for (auto id : all) {
                if (g.classes_[id.value].smallest_size == std::numeric_limits<std::size_t>::max()) {
                    throw EGraphFormatError("class " + std::to_string(id.value) + " has no finite member", r.offset());
                }
            }
            return g;
        }
    };

} // namespace detail

inline auto serialize(EGraph const& g) -> std::string { return detail::EGraphCodec::encode(g); }
inline auto deserialize(std::string_view bytes) -> EGraph { return detail::EGraphCodec::decode(bytes); }

inline void save_egraph(EGraph const& g, std::string const& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    auto bytes = serialize(g);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

inline auto load_egraph(std::string const& path) -> EGraph
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

} // namespace eggp
