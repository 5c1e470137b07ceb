"""Scan report rendering: JSON for machines, a markdown table for people.

Both renderings leave out timings and request digests so that two scans
of the same static simulator produce identical bytes.
"""

from __future__ import annotations

import json
from collections import Counter
from typing import Mapping, Optional, Sequence

from .checker import RiskLevel, ScanReport, Verdict

__all__ = ["report_to_dict", "reports_to_json", "reports_to_markdown", "summary"]

_MARK = {
    Verdict.PASS: "✓",
    Verdict.V2: "✗ (V2)",
    Verdict.V3: "✗ (V3)",
    Verdict.FAIL: "✗",
    Verdict.NOT_APPLICABLE: "N/A",
    Verdict.INCONCLUSIVE: "?",
}


def report_to_dict(r: ScanReport, meta: Optional[Mapping] = None) -> dict:
    out = {"label": r.label}
    if meta:
        out["meta"] = dict(meta)
    out.update(r.finding.verdicts())
    out["risk"] = {
        "bma": r.risk.letter,
        "replay": r.replay_risk,
        "bmma": r.bmma_risk,
    }
    out["inconclusive"] = r.inconclusive
    if r.error:
        out["error"] = r.error
    out["requests"] = r.requests
    out["evidence"] = [e.to_dict() for e in r.finding.evidence]
    return out


def summary(reports: Sequence[ScanReport]) -> dict:
    levels = Counter(r.risk.letter for r in reports if not r.inconclusive)
    return {
        "targets": len(reports),
        "risk": {lv.letter: levels.get(lv.letter, 0) for lv in sorted(RiskLevel, reverse=True)},
        "replay": sum(r.replay_risk for r in reports if not r.inconclusive),
        "bmma": sum(r.bmma_risk for r in reports if not r.inconclusive),
        "inconclusive": sum(r.inconclusive for r in reports),
    }


def reports_to_json(reports: Sequence[ScanReport], metas: Optional[Sequence[Mapping]] = None) -> str:
    metas = metas or [{}] * len(reports)
    doc = {
        "summary": summary(reports),
        "reports": [report_to_dict(r, m) for r, m in zip(reports, metas)],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _tick(flag: bool) -> str:
    return "✓" if flag else "✗"


def reports_to_markdown(reports: Sequence[ScanReport], metas: Optional[Sequence[Mapping]] = None) -> str:
    """One row per target in the column order of the published results table."""
    metas = metas or [{}] * len(reports)
    header = [
        "#", "Website", "Category",
        "Domain", "Name", "Nonce",
        "Message", "Body", "Nonce", "Signature", "Address",
        "BMA", "RA", "BMMA",
    ]
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    for i, (r, meta) in enumerate(zip(reports, metas), start=1):
        f = r.finding
        if r.inconclusive:
            risk, ra, bmma = "Inconclusive", "?", "?"
        else:
            risk = r.risk.letter
            ra = "●" if r.replay_risk else "○"
            bmma = "●" if r.bmma_risk else "○"
        cells = [
            str(meta.get("row") or i),
            str(meta.get("website") or r.label),
            str(meta.get("category") or ""),
            _tick(f.has_domain), _tick(f.has_name), _tick(f.has_nonce),
            _MARK[f.message], _MARK[f.body], _MARK[f.nonce], _MARK[f.signature], _MARK[f.address],
            risk, ra, bmma,
        ]
        lines.append("| " + " | ".join(cells) + " |")
    s = summary(reports)
    levels = ", ".join(f"{k}: {v}" for k, v in s["risk"].items())
    lines.append("")
    lines.append(
        f"{s['targets']} targets. BMA risk {levels}. RA {s['replay']}. BMMA {s['bmma']}. "
        f"Inconclusive {s['inconclusive']}."
    )
    return "\n".join(lines) + "\n"
