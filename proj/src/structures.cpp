#include "refute/structures.hpp"

#include <algorithm>
#include <map>

#include "refute/errors.hpp"

namespace refute {

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool is_subset(const IndexSet& a, const IndexSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

IndexSet FiniteSpace::all() const {
    IndexSet out(structures.size());
    for (int i = 0; i < size(); ++i) out[static_cast<std::size_t>(i)] = i;
    return out;
}

bool FiniteSpace::complete() const {
    return std::all_of(structures.begin(), structures.end(), [](const Structure& s) { return s.predicts.size() == 1; });
}

void FiniteSpace::validate() const {
    if (outcomes.empty()) throw DataError("structure space has no outcomes");
    if (structures.empty()) throw DataError("structure space has no structures");
    std::vector<bool> seen(outcomes.size(), false);
    std::set<std::string> names_seen;
    for (const auto& s : structures) {
        if (!names_seen.insert(s.name).second) throw DataError("duplicate structure name '" + s.name + "'");
        if (s.predicts.empty()) throw DataError("structure '" + s.name + "' predicts no outcome");
        if (!std::is_sorted(s.predicts.begin(), s.predicts.end()) ||
            std::adjacent_find(s.predicts.begin(), s.predicts.end()) != s.predicts.end())
            throw DataError("structure '" + s.name + "' has unsorted or repeated predictions");
        for (int o : s.predicts) {
            if (o < 0 || o >= outcome_count()) throw DataError("structure '" + s.name + "' predicts an unknown outcome");
            seen[static_cast<std::size_t>(o)] = true;
        }
    }
    for (std::size_t o = 0; o < seen.size(); ++o)
        if (!seen[o]) throw DataError("outcome '" + outcomes[o] + "' is predicted by no structure");
}

std::string FiniteSpace::label(int s) const {
    const auto& st = structures[static_cast<std::size_t>(s)];
    return st.theta ? *st.theta : st.name;
}

int FiniteSpace::index_of(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
        if (structures[static_cast<std::size_t>(i)].name == name) return i;
    throw DataError("unknown structure '" + name + "'");
}

IndexSet FiniteSpace::lookup(const std::vector<std::string>& names) const {
    IndexSet out;
    for (const auto& n : names) out.push_back(index_of(n));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::string> FiniteSpace::names(const IndexSet& set) const {
    std::vector<std::string> out;
    for (int i : set) out.push_back(structures[static_cast<std::size_t>(i)].name);
    return out;
}

FiniteSpace FiniteSpace::from_json(const json& j) {
    FiniteSpace sp;
    try {
        sp.outcomes = j.at("outcomes").get<std::vector<std::string>>();
        std::map<std::string, int> idx;
        for (std::size_t i = 0; i < sp.outcomes.size(); ++i)
            if (!idx.emplace(sp.outcomes[i], static_cast<int>(i)).second)
                throw DataError("duplicate outcome '" + sp.outcomes[i] + "'");
        for (const auto& js : j.at("structures")) {
            Structure s;
            s.name = js.at("name").get<std::string>();
            for (const auto& o : js.at("predicts")) {
                auto it = idx.find(o.get<std::string>());
                if (it == idx.end()) throw DataError("structure '" + s.name + "' predicts unknown outcome '" + o.get<std::string>() + "'");
                s.predicts.push_back(it->second);
            }
            std::sort(s.predicts.begin(), s.predicts.end());
            s.predicts.erase(std::unique(s.predicts.begin(), s.predicts.end()), s.predicts.end());
            if (js.contains("theta") && !js["theta"].is_null())
                s.theta = js["theta"].is_string() ? js["theta"].get<std::string>() : js["theta"].dump();
            sp.structures.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed structure space: ") + e.what());
    }
    sp.validate();
    return sp;
}

json FiniteSpace::to_json() const {
    json arr = json::array();
    for (const auto& s : structures) {
        json js{{"name", s.name}, {"predicts", json::array()}};
        for (int o : s.predicts) js["predicts"].push_back(outcomes[static_cast<std::size_t>(o)]);
        if (s.theta) js["theta"] = *s.theta;
        arr.push_back(js);
    }
    return json{{"outcomes", outcomes}, {"structures", arr}};
}

IndexSet complement(const FiniteSpace& space, const IndexSet& A) {
    const IndexSet every = space.all();
    IndexSet out;
    std::set_difference(every.begin(), every.end(), A.begin(), A.end(), std::back_inserter(out));
    return out;
}

std::vector<bool> predicted(const FiniteSpace& space, const IndexSet& A) {
    std::vector<bool> out(static_cast<std::size_t>(space.outcome_count()), false);
    for (int s : A)
        for (int o : space.structures[static_cast<std::size_t>(s)].predicts) out[static_cast<std::size_t>(o)] = true;
    return out;
}

namespace {

bool all_in(const IndexSet& outs, const std::vector<bool>& mask) {
    return std::all_of(outs.begin(), outs.end(), [&](int o) { return mask[static_cast<std::size_t>(o)]; });
}

bool any_in(const IndexSet& outs, const std::vector<bool>& mask) {
    return std::any_of(outs.begin(), outs.end(), [&](int o) { return mask[static_cast<std::size_t>(o)]; });
}

void check_set(const FiniteSpace& space, const IndexSet& A) {
    for (int s : A)
        if (s < 0 || s >= space.size()) throw DataError("assumption refers to an unknown structure");
    if (!std::is_sorted(A.begin(), A.end())) throw DataError("assumption index list must be sorted");
}

}  // namespace

NonRefutable nonrefutable_sets(const FiniteSpace& space, const IndexSet& A) {
    check_set(space, A);
    const std::vector<bool> inA = predicted(space, A);
    NonRefutable out;
    for (int s = 0; s < space.size(); ++s) {
        const auto& m = space.structures[static_cast<std::size_t>(s)].predicts;
        if (all_in(m, inA)) out.snf.push_back(s);
        if (any_in(m, inA)) out.wnf.push_back(s);
    }
    return out;
}

Confirmable confirmable_sets(const FiniteSpace& space, const IndexSet& A) {
    check_set(space, A);
    // the intersection of complements of M(s*) over A^c is the set of outcomes A^c never predicts
    std::vector<bool> free = predicted(space, complement(space, A));
    free.flip();
    Confirmable out;
    for (int s = 0; s < space.size(); ++s) {
        const auto& m = space.structures[static_cast<std::size_t>(s)].predicts;
        if (all_in(m, free)) out.scon.push_back(s);
        if (any_in(m, free)) out.wcon.push_back(s);
    }
    return out;
}

bool is_refutable(const FiniteSpace& space, const IndexSet& A) {
    return nonrefutable_sets(space, A).snf.size() != static_cast<std::size_t>(space.size());
}

bool is_confirmable(const FiniteSpace& space, const IndexSet& A) { return !confirmable_sets(space, A).wcon.empty(); }

std::set<std::string> identified_set(const FiniteSpace& space, const IndexSet& A, int outcome) {
    std::set<std::string> out;
    for (int s : A) {
        const auto& m = space.structures[static_cast<std::size_t>(s)].predicts;
        if (std::binary_search(m.begin(), m.end(), outcome)) out.insert(space.label(s));
    }
    return out;
}

std::string extension_class_name(ExtensionClass c) {
    switch (c) {
        case ExtensionClass::NotWellDefined: return "not well-defined";
        case ExtensionClass::WellDefined: return "well-defined";
        case ExtensionClass::ThetaConsistent: return "theta-consistent";
        case ExtensionClass::Strong: return "strong";
    }
    return "?";
}

json ExtensionCheck::to_json() const {
    return json{{"well_defined", well_defined},
                {"theta_consistent", theta_consistent},
                {"strong", strong},
                {"classification", extension_class_name(classification)}};
}

ExtensionCheck check_extension(const FiniteSpace& space, const IndexSet& A, const IndexSet& ext) {
    check_set(space, A);
    check_set(space, ext);
    if (!is_subset(A, ext)) throw ConfigError("the extension must contain the assumption");
    ExtensionCheck out;
    std::vector<bool> cover = predicted(space, ext);
    out.well_defined = std::all_of(cover.begin(), cover.end(), [](bool b) { return b; });
    if (!out.well_defined) return out;
    out.theta_consistent = true;
    for (int o = 0; o < space.outcome_count() && out.theta_consistent; ++o) {
        auto base = identified_set(space, A, o);
        if (!base.empty() && base != identified_set(space, ext, o)) out.theta_consistent = false;
    }
    out.strong = set_intersection(nonrefutable_sets(space, A).wnf, ext) == A;
    out.classification = out.strong             ? ExtensionClass::Strong
                         : out.theta_consistent ? ExtensionClass::ThetaConsistent
                                                : ExtensionClass::WellDefined;
    return out;
}

IndexSet maximal_strong_extension(const FiniteSpace& space, const IndexSet& A) {
    return set_union(A, complement(space, nonrefutable_sets(space, A).snf));
}

Decidability binary_decidability(const FiniteSpace& space, const IndexSet& H) {
    NonRefutable nf = nonrefutable_sets(space, H);
    Confirmable con = confirmable_sets(space, H);
    Decidability out;
    out.strongly_decidable = con.scon == nf.wnf;
    if (nf.snf == nf.wnf && nf.snf.size() != static_cast<std::size_t>(space.size())) out.smallest_extension = nf.snf;
    if (con.scon == con.wcon && !con.wcon.empty()) out.largest_shrunken = con.wcon;
    return out;
}

bool decidable_by_definition(const FiniteSpace& space, const IndexSet& H) {
    std::vector<bool> byH = predicted(space, H), byHc = predicted(space, complement(space, H));
    for (int o = 0; o < space.outcome_count(); ++o)
        if (byH[static_cast<std::size_t>(o)] && byHc[static_cast<std::size_t>(o)]) return false;
    return true;
}

Completion complete_space(const FiniteSpace& space) {
    Completion c;
    c.space.outcomes = space.outcomes;
    for (int s = 0; s < space.size(); ++s) {
        const auto& st = space.structures[static_cast<std::size_t>(s)];
        for (int o : st.predicts) {
            Structure child;
            child.name = st.predicts.size() == 1 ? st.name : st.name + "/" + space.outcomes[static_cast<std::size_t>(o)];
            child.predicts = {o};
            child.theta = space.label(s);
            c.space.structures.push_back(std::move(child));
            c.parent.push_back(s);
        }
    }
    return c;
}

IndexSet lift(const Completion& c, const IndexSet& A) {
    IndexSet out;
    for (int i = 0; i < c.space.size(); ++i)
        if (std::binary_search(A.begin(), A.end(), c.parent[static_cast<std::size_t>(i)])) out.push_back(i);
    return out;
}

IndexSet minimal_deviation_extension(const FiniteSpace& space, const IndexSet& base, const std::vector<double>& scores) {
    check_set(space, base);
    if (scores.size() != static_cast<std::size_t>(space.size())) throw ConfigError("one deviation score per structure is required");
    std::map<IndexSet, double> best;
    for (int s : base) {
        const auto& m = space.structures[static_cast<std::size_t>(s)].predicts;
        auto [it, inserted] = best.emplace(m, scores[static_cast<std::size_t>(s)]);
        if (!inserted) it->second = std::min(it->second, scores[static_cast<std::size_t>(s)]);
    }
    IndexSet out;
    for (int s : base)
        if (scores[static_cast<std::size_t>(s)] <= best.at(space.structures[static_cast<std::size_t>(s)].predicts))
            out.push_back(s);
    return out;
}

json analyze_space(const FiniteSpace& space, const IndexSet& A, const std::optional<IndexSet>& ext,
                   const std::optional<IndexSet>& hypothesis) {
    NonRefutable nf = nonrefutable_sets(space, A);
    Confirmable con = confirmable_sets(space, A);
    json j{{"complete", space.complete()},
           {"assumption", space.names(A)},
           {"snf", space.names(nf.snf)},
           {"wnf", space.names(nf.wnf)},
           {"scon", space.names(con.scon)},
           {"wcon", space.names(con.wcon)},
           {"refutable", is_refutable(space, A)},
           {"confirmable", is_confirmable(space, A)}};
    IndexSet maximal = maximal_strong_extension(space, A);
    j["maximal_strong_extension"] = {{"set", space.names(maximal)},
                                     {"check", check_extension(space, A, maximal).to_json()}};
    if (ext) j["extension"] = {{"set", space.names(*ext)}, {"check", check_extension(space, A, *ext).to_json()}};
    if (hypothesis) {
        Decidability d = binary_decidability(space, *hypothesis);
        json h{{"set", space.names(*hypothesis)}, {"strongly_decidable", d.strongly_decidable}};
        h["smallest_extension"] = d.smallest_extension ? json(space.names(*d.smallest_extension)) : json(nullptr);
        h["largest_shrunken"] = d.largest_shrunken ? json(space.names(*d.largest_shrunken)) : json(nullptr);
        j["hypothesis"] = h;
    }
    return j;
}

}  // namespace refute
