#pragma once

#include <map>
#include <string>
#include <vector>

#include "finsler/fit.hpp"

namespace finsler::diagram {

/// Guard predicates over a classification report. Nonzero guards threshold
/// the smallest sampled norm; zero/constancy guards threshold the largest
/// sampled deviation.
enum class GuardId {
    RNonzero,
    RicNonzero,
    CNonzero,
    RScalarNonzero,
    HhatZero,
    NablaAPlusAANonzero,
    NablaBPlusABNonzero,
    NablaRMinusRANonzero,
    B1Nonzero,
    RConstant,
};
const char* guard_name(GuardId g);

/// One implication between recurrence conditions, guarded by predicates on
/// the report's side values. Form guards refer to the premise's fitted forms.
struct Rule {
    std::string id;
    fit::Condition premise;
    fit::Condition conclusion;
    std::vector<GuardId> guards;
    std::string note;
};

/// The full implication table. Two entries share the edge from the
/// generalized concircular class to the generalized Ricci class: one guarded
/// on the forms, one on the geometric structure (integrable, constant
/// scalar), so the table has one more entry than it has distinct edges.
const std::vector<Rule>& rule_table();

enum class Status { Confirmed, Vacuous, Violated, Degenerate };
const char* status_name(Status s);

struct Outcome {
    std::string rule_id;
    fit::Verdict premise_verdict;
    fit::Verdict conclusion_verdict;
    bool guards_ok = false;
    std::map<std::string, double> guard_values;
    Status status = Status::Vacuous;
};

struct Evaluation {
    std::vector<Outcome> outcomes;
    bool any_violation = false;
};

/// Evaluate every rule against a classification report.
Evaluation evaluate(const fit::Report& report, const fit::Eps& eps);

}  // namespace finsler::diagram
