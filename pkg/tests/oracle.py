"""Independent straight-line oracle for the scoring pipeline.

Implements the scoring math directly on plain dicts, term by term, with no
imports from the package under test. Used to compute frozen expected values
and to cross-check the engine on randomized instances.
"""

import math

DEFAULT_LEVELS = [
    ["domain", "data_type", "architecture", "task"],
    ["domain", "data_type", "task"],
    ["domain", "data_type"],
    ["data_type"],
    [],
]
DEFAULT_WEIGHTS = [1.0, 0.5, 0.25, 0.125, 0.0625]


def trigger_ids(catalog):
    out = {}
    for factor in catalog["factors"]:
        role = factor.get("execution_mode_role", "none")
        if role == "digital-trigger":
            out["digital"] = factor["id"]
        elif role == "physical-trigger":
            out["physical"] = factor["id"]
    return out


def record_axis(record, axis):
    ctx = record["context"]
    if axis == "architecture":
        return ctx["model_architecture"]
    return ctx[axis]


def match_batches(records, attack, characteristics, mode, levels):
    """Batch per downgrade level; exact matches short-circuit."""
    per_level = {}
    for record in records:
        if record["attack_family"] != attack["attack_family"]:
            continue
        if record["threat_model"] != attack["threat_model"]:
            continue
        if record["execution_mode"] != mode:
            continue
        for i, axes in enumerate(levels):
            if all(record_axis(record, axis) == characteristics[axis] for axis in axes):
                per_level.setdefault(i, []).append(record)
                break
    if 0 in per_level:
        per_level = {0: per_level[0]}
    batches = []
    for level in sorted(per_level):
        members = per_level[level]
        mean = sum(r["success_rate"] for r in members) / len(members)
        batches.append({"level": level, "mean": mean,
                        "record_ids": sorted(r["record_id"] for r in members)})
    return batches


def weighted_success_rate(batches, weights, records, mode, fallback=0.5):
    if not batches:
        rates = [r["success_rate"] for r in records if r["execution_mode"] == mode]
        if rates:
            return sum(rates) / len(rates), True
        return fallback, True
    num = 0.0
    den = 0.0
    for batch in batches:
        w = weights[batch["level"]]
        num += batch["mean"] * w
        den += w
    return num / den, False


def eval_rule_condition(node, answers):
    if "all" in node:
        return all(eval_rule_condition(c, answers) for c in node["all"])
    if "any" in node:
        return any(eval_rule_condition(c, answers) for c in node["any"])
    value = answers.get(node["factor"])
    if "in" in node:
        return value in node["in"]
    return value not in node["not_in"]


def zeroing_rule_id(attack, rules, categorical_answers):
    for rule in rules:
        applies = True
        for attr, expected in rule["applies_to"].items():
            value = attack.get(attr)
            if isinstance(expected, list):
                applies = applies and value in expected
            else:
                applies = applies and value == expected
        if applies and eval_rule_condition(rule["condition"], categorical_answers):
            return rule["rule_id"]
    return None


def oracle_assess(
    catalog,
    factor_scores,
    impact_scores,
    categorical_answers,
    characteristics,
    records,
    epsilon=1e-6,
    impact_mode="noisy-or",
    degenerate_value=1.0,
    levels=None,
    weights=None,
    fallback=0.5,
):
    """Score every attack; returns a dict of per-attack result dicts."""
    levels = DEFAULT_LEVELS if levels is None else levels
    weights = DEFAULT_WEIGHTS if weights is None else weights
    triggers = trigger_ids(catalog)
    attacks = catalog["attacks"]
    rules = catalog.get("zeroing_rules", [])

    f_generic = {}
    for attack in attacks:
        product = 1.0
        for fid in attack["required_factors"]:
            if fid in triggers.values():
                continue
            product = product * factor_scores[fid]
        f_generic[attack["id"]] = product

    f_mode = {"digital": {}, "physical": {}}
    for attack in attacks:
        for mode in attack["execution_modes"]:
            f_mode[mode][attack["id"]] = f_generic[attack["id"]] * factor_scores[triggers[mode]]

    norm = {"digital": {}, "physical": {}}
    for mode in ("digital", "physical"):
        cohort = f_mode[mode]
        if not cohort:
            continue
        logs = {aid: math.log(value + epsilon) for aid, value in cohort.items()}
        low = min(logs.values())
        high = max(logs.values())
        if high - low < 1e-12:
            for aid in cohort:
                norm[mode][aid] = 0.0 if cohort[aid] == 0.0 else degenerate_value
        else:
            for aid in cohort:
                norm[mode][aid] = (logs[aid] - low) / (high - low)

    results = {}
    for attack in attacks:
        aid = attack["id"]
        per_mode = {}
        complement = 1.0
        for mode in ("digital", "physical"):
            if mode in attack["execution_modes"]:
                batches = match_batches(records, attack, characteristics, mode, levels)
                sr, fb = weighted_success_rate(batches, weights, records, mode, fallback)
                nf = norm[mode][aid]
                l_em = nf * sr
                per_mode[mode] = {
                    "f_em": f_mode[mode][aid], "norm_f_em": nf, "sr_em": sr,
                    "sr_fallback": fb, "l_em": l_em, "batches": batches,
                }
            else:
                l_em = 0.0
                per_mode[mode] = {
                    "f_em": None, "norm_f_em": None, "sr_em": None,
                    "sr_fallback": False, "l_em": 0.0, "batches": [],
                }
            complement = complement * (1.0 - l_em)
        l_overall = 1.0 - complement

        impact_complement = 1.0
        for iid in attack["compromised_impacts"]:
            impact_complement = impact_complement * (1.0 - impact_scores[iid])
        impact = 1.0 - impact_complement if impact_mode == "noisy-or" else impact_complement

        raw = min(l_overall * impact * 10.0, 10.0)
        rule_id = zeroing_rule_id(attack, rules, categorical_answers)
        results[aid] = {
            "f_generic": f_generic[aid],
            "modes": per_mode,
            "l_overall": l_overall,
            "impact": impact,
            "raw_score": raw,
            "final_score": 0.0 if rule_id else raw,
            "zeroed_by": rule_id,
        }
    return results
