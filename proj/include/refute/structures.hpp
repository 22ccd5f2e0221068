#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "refute/data.hpp"

namespace refute {

// Sorted, duplicate-free index lists.
using IndexSet = std::vector<int>;

struct Structure {
    std::string name;
    IndexSet predicts;                // outcome indices, nonempty
    std::optional<std::string> theta;  // parameter label
};

struct FiniteSpace {
    std::vector<std::string> outcomes;
    std::vector<Structure> structures;

    int size() const { return static_cast<int>(structures.size()); }
    int outcome_count() const { return static_cast<int>(outcomes.size()); }
    IndexSet all() const;
    // every structure has a single predicted outcome
    bool complete() const;
    // DataError on empty predictions, bad indices, or outcomes no structure predicts
    void validate() const;
    // theta(s) if set, otherwise the structure name
    std::string label(int s) const;
    int index_of(const std::string& name) const;
    IndexSet lookup(const std::vector<std::string>& names) const;
    std::vector<std::string> names(const IndexSet& set) const;

    static FiniteSpace from_json(const json& j);
    json to_json() const;
};

IndexSet complement(const FiniteSpace& space, const IndexSet& A);
// outcomes predicted by at least one structure of A
std::vector<bool> predicted(const FiniteSpace& space, const IndexSet& A);

struct NonRefutable {
    IndexSet snf;
    IndexSet wnf;
};
NonRefutable nonrefutable_sets(const FiniteSpace& space, const IndexSet& A);

struct Confirmable {
    IndexSet scon;
    IndexSet wcon;
};
Confirmable confirmable_sets(const FiniteSpace& space, const IndexSet& A);

bool is_refutable(const FiniteSpace& space, const IndexSet& A);
bool is_confirmable(const FiniteSpace& space, const IndexSet& A);

// {theta(s) : s in A, F in M(s)}
std::set<std::string> identified_set(const FiniteSpace& space, const IndexSet& A, int outcome);

enum class ExtensionClass { NotWellDefined, WellDefined, ThetaConsistent, Strong };
std::string extension_class_name(ExtensionClass c);

struct ExtensionCheck {
    bool well_defined = false;
    bool theta_consistent = false;
    bool strong = false;
    ExtensionClass classification = ExtensionClass::NotWellDefined;
    json to_json() const;
};
// ConfigError unless A is a subset of ext.
ExtensionCheck check_extension(const FiniteSpace& space, const IndexSet& A, const IndexSet& ext);

// A together with the complement of H^snf(A); strong when the space is complete.
IndexSet maximal_strong_extension(const FiniteSpace& space, const IndexSet& A);

struct Decidability {
    bool strongly_decidable = false;
    std::optional<IndexSet> smallest_extension;
    std::optional<IndexSet> largest_shrunken;
};
Decidability binary_decidability(const FiniteSpace& space, const IndexSet& H);

// Every outcome F: F is not predicted by H^c or not predicted by H.
bool decidable_by_definition(const FiniteSpace& space, const IndexSet& H);

struct Completion {
    FiniteSpace space;
    std::vector<int> parent;  // index of the originating structure
};
Completion complete_space(const FiniteSpace& space);
// children of the structures in A
IndexSet lift(const Completion& c, const IndexSet& A);

// Structures of `base` whose score is minimal among base members with the same prediction set.
IndexSet minimal_deviation_extension(const FiniteSpace& space, const IndexSet& base,
                                     const std::vector<double>& scores);

// Set algebra helpers on sorted lists.
IndexSet set_union(const IndexSet& a, const IndexSet& b);
IndexSet set_intersection(const IndexSet& a, const IndexSet& b);
bool is_subset(const IndexSet& a, const IndexSet& b);

// Full report used by the command line: sets, refutability, optional extension and hypothesis checks.
json analyze_space(const FiniteSpace& space, const IndexSet& A, const std::optional<IndexSet>& ext,
                   const std::optional<IndexSet>& hypothesis);

}  // namespace refute
