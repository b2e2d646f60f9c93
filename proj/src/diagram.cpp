#include "finsler/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace finsler::diagram {

namespace {

using fit::Condition;
using fit::Verdict;

constexpr double kScalarNonzeroThreshold = 1e-8;

enum class Target { R, Ric, C };

Target target_of(Condition c) {
    switch (c) {
        case Condition::Sym:
        case Condition::F:
        case Condition::TwoF:
        case Condition::GF:
        case Condition::G2F:
            return Target::R;
        case Condition::RSym:
        case Condition::RF:
        case Condition::TwoRF:
        case Condition::GRF:
        case Condition::G2RF:
            return Target::Ric;
        default:
            return Target::C;
    }
}

}  // namespace

const char* guard_name(GuardId g) {
    switch (g) {
        case GuardId::RNonzero: return "R_NONZERO";
        case GuardId::RicNonzero: return "RIC_NONZERO";
        case GuardId::CNonzero: return "C_NONZERO";
        case GuardId::RScalarNonzero: return "R_SCALAR_NONZERO";
        case GuardId::HhatZero: return "HHAT_ZERO";
        case GuardId::NablaAPlusAANonzero: return "NABLA_A_PLUS_AA_NONZERO";
        case GuardId::NablaBPlusABNonzero: return "NABLA_B_PLUS_AB_NONZERO";
        case GuardId::NablaRMinusRANonzero: return "NABLA_R_MINUS_RA_NONZERO";
        case GuardId::B1Nonzero: return "B1_NONZERO";
        case GuardId::RConstant: return "R_CONSTANT";
    }
    return "?";
}

const char* status_name(Status s) {
    switch (s) {
        case Status::Confirmed: return "CONFIRMED";
        case Status::Vacuous: return "VACUOUS";
        case Status::Violated: return "VIOLATED";
        case Status::Degenerate: return "DEGENERATE";
    }
    return "?";
}

const std::vector<Rule>& rule_table() {
    using G = GuardId;
    using C = Condition;
    static const std::vector<Rule> rules = {
        {"F_implies_RF", C::F, C::RF, {G::RNonzero, G::RicNonzero},
         "simple recurrence passes to the Ricci trace with the same form"},
        {"F_implies_CF", C::F, C::CF, {G::RNonzero, G::CNonzero, G::RScalarNonzero},
         "simple recurrence passes to the concircular tensor when the scalar is nonzero"},
        {"F_implies_2F", C::F, C::TwoF, {G::RNonzero, G::NablaAPlusAANonzero},
         "differentiating the recurrence law once more"},
        {"F_implies_2RF", C::F, C::TwoRF, {G::RNonzero, G::RicNonzero, G::NablaAPlusAANonzero},
         "the differentiated law traced to the Ricci tensor"},
        {"RF_implies_2RF", C::RF, C::TwoRF, {G::RicNonzero, G::NablaAPlusAANonzero},
         "differentiating the Ricci recurrence law"},
        {"CF_implies_2CF", C::CF, C::TwoCF, {G::CNonzero, G::NablaAPlusAANonzero},
         "differentiating the concircular recurrence law"},
        {"CF_implies_GF", C::CF, C::GF, {G::CNonzero, G::RNonzero, G::NablaRMinusRANonzero},
         "expanding the concircular law over the curvature and model tensors"},
        {"CF_implies_GRF", C::CF, C::GRF, {G::CNonzero, G::RicNonzero, G::NablaRMinusRANonzero},
         "the expanded law traced to the Ricci tensor"},
        {"CF_implies_F", C::CF, C::F, {G::CNonzero, G::RNonzero, G::HhatZero},
         "concircular recurrence collapses to simple recurrence when the horizontal distribution integrates"},
        {"GF_implies_G2F", C::GF, C::G2F,
         {G::RNonzero, G::NablaAPlusAANonzero, G::NablaBPlusABNonzero},
         "differentiating the generalized recurrence law"},
        {"GF_implies_CF", C::GF, C::CF, {G::RNonzero, G::CNonzero},
         "the scalar trace law turns the generalized law into the concircular one"},
        {"GF_implies_2CF", C::GF, C::TwoCF,
         {G::RNonzero, G::CNonzero, G::NablaAPlusAANonzero, G::RScalarNonzero},
         "the concircular consequence differentiated once more"},
        {"GF_implies_GRF", C::GF, C::GRF, {G::RNonzero, G::RicNonzero},
         "tracing the generalized law to the Ricci tensor"},
        {"GF_implies_F", C::GF, C::F, {G::RNonzero, G::HhatZero, G::RScalarNonzero},
         "generalized recurrence collapses under integrability and nonzero scalar"},
        {"GRF_implies_G2RF", C::GRF, C::G2RF,
         {G::RicNonzero, G::NablaAPlusAANonzero, G::NablaBPlusABNonzero},
         "differentiating the generalized Ricci law"},
        {"GCF_implies_G2CF", C::GCF, C::G2CF,
         {G::CNonzero, G::NablaAPlusAANonzero, G::NablaBPlusABNonzero},
         "differentiating the generalized concircular law"},
        {"GCF_implies_GF", C::GCF, C::GF, {G::CNonzero, G::RNonzero, G::B1Nonzero},
         "rewriting the concircular law over the curvature tensor"},
        {"GCF_implies_GRF_forms", C::GCF, C::GRF, {G::CNonzero, G::RicNonzero, G::B1Nonzero},
         "the rewritten law traced to the Ricci tensor, guarded on the derived form"},
        {"GCF_implies_GRF_constant_r", C::GCF, C::GRF,
         {G::CNonzero, G::RicNonzero, G::HhatZero, G::RConstant},
         "the same edge guarded on the geometric structure instead of the forms"},
    };
    return rules;
}

Evaluation evaluate(const fit::Report& report, const fit::Eps& eps) {
    const int n = report.n;
    const double nf = static_cast<double>(n);

    double minR = std::numeric_limits<double>::infinity();
    double minRic = minR, minC = minR;
    for (const auto& t : report.tensors) {
        minR = std::min(minR, t.norm_R);
        minRic = std::min(minRic, t.norm_Ric);
        minC = std::min(minC, t.norm_C);
    }

    auto target_norm_min = [&](Target t) {
        switch (t) {
            case Target::R: return minR;
            case Target::Ric: return minRic;
            case Target::C: return minC;
        }
        return 0.0;
    };
    auto target_components = [&](Target t) {
        return t == Target::Ric ? nf * nf : nf * nf * nf * nf;
    };
    auto target_degenerate = [&](Target t) {
        return target_norm_min(t) < eps.deg * std::sqrt(target_components(t));
    };

    auto side_min = [&](const fit::ConditionReport& cr, const char* key) {
        auto it = cr.side.find(std::string(key) + "_min");
        return it == cr.side.end() ? 0.0 : it->second;
    };

    Evaluation ev;
    for (const auto& rule : rule_table()) {
        Outcome oc;
        oc.rule_id = rule.id;
        const auto& prem = report.at(rule.premise);
        const auto& conc = report.at(rule.conclusion);
        oc.premise_verdict = prem.verdict;
        oc.conclusion_verdict = conc.verdict;

        bool guards_ok = true;
        for (GuardId g : rule.guards) {
            double value = 0.0;
            bool ok = false;
            switch (g) {
                case GuardId::RNonzero:
                    value = minR;
                    ok = !target_degenerate(Target::R);
                    break;
                case GuardId::RicNonzero:
                    value = minRic;
                    ok = !target_degenerate(Target::Ric);
                    break;
                case GuardId::CNonzero:
                    value = minC;
                    ok = !target_degenerate(Target::C);
                    break;
                case GuardId::RScalarNonzero:
                    value = report.r_abs_min;
                    ok = value > kScalarNonzeroThreshold;
                    break;
                case GuardId::HhatZero:
                    value = report.rhat_rel_max;
                    ok = value < eps.fit;
                    break;
                case GuardId::NablaAPlusAANonzero:
                    value = side_min(prem, "norm_nabla_A_plus_AA");
                    ok = value > eps.form * nf;
                    break;
                case GuardId::NablaBPlusABNonzero:
                    value = side_min(prem, "norm_nabla_B_plus_AB");
                    ok = value > eps.form * nf;
                    break;
                case GuardId::NablaRMinusRANonzero:
                    value = side_min(prem, "norm_nabla_r_minus_rA");
                    ok = value > eps.form * std::sqrt(nf);
                    break;
                case GuardId::B1Nonzero:
                    value = side_min(prem, "norm_B1");
                    ok = value > eps.form * std::sqrt(nf);
                    break;
                case GuardId::RConstant:
                    value = report.r_const_dev;
                    ok = value < eps.fit;
                    break;
            }
            oc.guard_values[guard_name(g)] = value;
            guards_ok = guards_ok && ok;
        }
        oc.guards_ok = guards_ok;

        if (target_degenerate(target_of(rule.premise)) ||
            target_degenerate(target_of(rule.conclusion))) {
            oc.status = Status::Degenerate;
        } else if (prem.verdict != Verdict::Holds || !guards_ok) {
            oc.status = Status::Vacuous;
        } else if (conc.verdict == Verdict::Holds) {
            oc.status = Status::Confirmed;
        } else if (conc.verdict == Verdict::Fails) {
            oc.status = Status::Violated;
            ev.any_violation = true;
        } else {
            oc.status = Status::Degenerate;
        }
        ev.outcomes.push_back(std::move(oc));
    }
    return ev;
}

}  // namespace finsler::diagram
