"""Stable JSON/CSV formats for instances and reports.

Instance files carry "agents", "preferences", and optionally "communities".
Result files embed provenance (tool version, argv, seed, timestamp); rerunning
the recorded command reproduces the file byte-for-byte except the timestamp.
"""
from __future__ import annotations

import csv
import io
import json
import re
import sys
from datetime import datetime, timezone
from fractions import Fraction
from typing import Optional

from .integration import ExtendedHousingMarket, IntegrationReport
from .market import HousingMarket, MarketValidationError, validate_market
from .random_markets import SimulationSummary, StatTriple

AGENT_NAME = re.compile(r"^[A-Za-z0-9_-]+$")


def parse_instance(obj: dict) -> ExtendedHousingMarket | HousingMarket:
    """Validate a decoded instance file; returns a partitioned market iff
    the file carries communities."""
    if not isinstance(obj, dict):
        raise MarketValidationError("instance file must be a JSON object")
    agents = obj.get("agents")
    prefs = obj.get("preferences")
    if not isinstance(agents, list) or not all(isinstance(a, str) for a in agents):
        raise MarketValidationError('"agents" must be an array of strings')
    for a in agents:
        if not AGENT_NAME.match(a):
            raise MarketValidationError(
                f"agent name {a!r} must match {AGENT_NAME.pattern}")
    if not isinstance(prefs, dict):
        raise MarketValidationError('"preferences" must be an object')
    market = validate_market(agents, prefs)
    communities = obj.get("communities")
    if communities is None:
        return market
    if (not isinstance(communities, list)
            or not all(isinstance(c, list) for c in communities)):
        raise MarketValidationError('"communities" must be an array of arrays')
    return ExtendedHousingMarket(market, tuple(tuple(c) for c in communities))


def load_instance(path: str) -> ExtendedHousingMarket | HousingMarket:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MarketValidationError(f"{path}: not valid JSON ({exc})") from exc
    return parse_instance(obj)


def instance_payload(thing: ExtendedHousingMarket | HousingMarket) -> dict:
    if isinstance(thing, ExtendedHousingMarket):
        market = thing.market
        out = market_payload(market)
        out["communities"] = [list(c) for c in thing.communities]
        return out
    return market_payload(thing)


def market_payload(market: HousingMarket) -> dict:
    return {
        "agents": list(market.agents),
        "preferences": {a: list(row) for a, row in market.preferences.items()},
    }


def fraction_payload(x: Fraction) -> dict:
    return {"numerator": x.numerator, "denominator": x.denominator,
            "value": float(x)}


def triple_payload(t: StatTriple) -> dict:
    return {"mean": t.mean, "sd": t.sd, "se": t.se}


def report_payload(report: IntegrationReport) -> dict:
    return {
        "n": report.n,
        "k": report.k,
        "sizes": list(report.sizes),
        "per_agent": [
            {"id": a,
             "community": report.community_of[a],
             "segregated_rank": report.segregated_rank[a],
             "integrated_rank": report.integrated_rank[a],
             "gain": report.gains[a],
             "class": report.classification(a)}
            for a in report.agents],
        "total_gain": report.total_gain,
        "avg_gain": fraction_payload(report.avg_gain),
        "community_gain": list(report.community_gain),
        "community_avg_gain": [fraction_payload(f) for f in report.community_avg_gain],
        "counts": {"benefited": len(report.benefited),
                   "unaffected": len(report.unaffected),
                   "harmed": len(report.harmed)},
        "community_harmed": list(report.harmed_by_community()),
        "community_benefited": list(report.benefited_by_community()),
        "community_cycles": list(report.community_cycles),
        "total_cycles": report.total_cycles,
    }


def report_csv(report: IntegrationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "community", "segregated_rank", "integrated_rank",
                "gain", "class"])
    for a in report.agents:
        w.writerow([a, report.community_of[a], report.segregated_rank[a],
                    report.integrated_rank[a], report.gains[a],
                    report.classification(a)])
    return buf.getvalue()


def summary_payload(summary: SimulationSummary) -> dict:
    return {
        "sizes": list(summary.sizes),
        "n": summary.n,
        "trials": summary.trials,
        "seed": summary.seed,
        "seed_rule": summary.seed_rule,
        "communities": [
            {"size": c.size,
             "gain_ranks": triple_payload(c.gain_ranks),
             "gain_pct": triple_payload(c.gain_pct),
             "benefited": triple_payload(c.benefited),
             "harmed": triple_payload(c.harmed),
             "unaffected": triple_payload(c.unaffected),
             "cycles": triple_payload(c.cycles)}
            for c in summary.communities],
        "frac_benefited": triple_payload(summary.frac_benefited),
        "frac_harmed": triple_payload(summary.frac_harmed),
        "segregated_rank_sum": triple_payload(summary.segregated_rank_sum),
        "integrated_rank_sum": triple_payload(summary.integrated_rank_sum),
        "integrated_cycles": triple_payload(summary.integrated_cycles),
    }


def summary_csv(summary: SimulationSummary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["community", "size", "mean_gain_ranks", "sd", "se",
                "mean_harmed", "mean_benefited", "mean_cycles"])
    for j, c in enumerate(summary.communities):
        w.writerow([j, c.size, c.gain_ranks.mean, c.gain_ranks.sd,
                    c.gain_ranks.se, c.harmed.mean, c.benefited.mean,
                    c.cycles.mean])
    return buf.getvalue()


def envelope(payload: dict, command: list[str], seed: Optional[int] = None,
             version: str = "0.1.0") -> dict:
    out = dict(payload)
    out["provenance"] = {
        "tool_version": version,
        "command": list(command),
        "seed": seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    return out


def dump_json(payload: dict, path: Optional[str]) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def dump_text(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
