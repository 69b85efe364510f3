#!/usr/bin/env python3
"""Brute-force checker for fixtures/order_events.csv.

Re-derives every fact the fixture has to satisfy straight from the raw CSV,
without touching the Rust code, and prints the derived values that the Rust
tests freeze as expected results. Exits non-zero on the first violated fact.

    python3 fixtures/check_fixture.py
"""

import csv
import json
import os
import sys
from collections import Counter, defaultdict
from datetime import datetime
from itertools import permutations

HERE = os.path.dirname(os.path.abspath(__file__))
ABBREV = {
    "RP": "receive payment",
    "AR": "archive",
    "RO": "receive order",
    "PO": "pack order",
    "AI": "add item",
    "SP": "ship parcel",
}


def load():
    with open(os.path.join(HERE, "order_events.csv"), newline="") as f:
        rows = list(csv.DictReader(f))
    for pos, r in enumerate(rows):
        r["_pos"] = pos
        r["_t"] = datetime.strptime(r["time"], "%d/%m/%Y %H:%M")
    return rows


def check(cond, msg):
    if not cond:
        print("FAIL:", msg)
        sys.exit(1)
    print("ok:", msg)


def main():
    rows = load()
    check(len(rows) == 32, "32 events")
    check(all(rows[i]["_t"] <= rows[i + 1]["_t"] for i in range(31)), "table is time-ordered")

    # group by order in order of first appearance, then by time, ties by position
    first_seen = []
    for r in rows:
        if r["order"] not in first_seen:
            first_seen.append(r["order"])
    ordered = sorted(rows, key=lambda r: (first_seen.index(r["order"]), r["_t"], r["_pos"]))
    e = {i + 1: r for i, r in enumerate(ordered)}  # e1..e32

    check(first_seen == ["23", "35", "41", "56", "72"], "cases {23,35,41,56,72} in first-seen order")
    traces = defaultdict(list)
    for i in range(1, 33):
        traces[e[i]["order"]].append(i)
    lens = [len(traces[c]) for c in first_seen]
    check(lens == [2, 8, 8, 6, 8], "trace lengths 2/8/8/6/8")
    check(traces["23"] == [1, 2], "trace of 23 is <e1,e2>")
    check(e[1]["time"] == "19/12/2018 15:46" and e[1]["action"] == "receive payment", "e1 time/action")
    check(e[2]["time"] == "19/12/2018 16:30" and e[2]["action"] == "archive", "e2 time/action")
    check(e[1]["user"] == "System" and e[1]["customer"] == "A7001", "e1 user System, customer A7001")
    check(e[1]["item"] == "", "item undefined on e1")

    check(e[4]["action"] == e[8]["action"] == "pack order", "e4/e8 pack order")
    check(e[4]["life-cycle"] == "start" and e[8]["life-cycle"] == "complete", "e4 start, e8 complete")
    check(e[4]["user"] == e[8]["user"] == "Alice", "e4/e8 user Alice")

    variants = []
    for c in first_seen:
        variants.append([e[i]["action"] for i in traces[c]])
    expected = [
        "RP AR",
        "RO PO AI AI SP PO RP AR",
        "RO PO AI SP AI SP PO AR",
        "RO PO RP AI PO AR",
        "RO PO AI PO RP PO AI SP",
    ]
    check(variants == [[ABBREV[a] for a in v.split()] for v in expected], "action variants match L'")

    def orders_of(attr, val):
        return {r["order"] for r in rows if r[attr] == val}

    check(len(orders_of("customer", "A7001")) == 3, "customer A7001 spans 3 orders")
    check(len(orders_of("delivery", "623")) == 2, "delivery 623 spans 2 orders")

    runs = []
    for c in first_seen:
        t = traces[c]
        for a, b in zip(t, t[1:]):
            if e[a]["action"] == e[b]["action"]:
                runs.append((a, b))
    check(runs == [(5, 6)], "<e5,e6> is the only equal-action run")
    check([e[i]["customer"] for i in traces["23"] if e[i]["customer"]] == ["A7001"], "case 23 customer trace <A7001>")

    # partial order: every linearization of order 35 respects time
    t35 = traces["35"]
    lin_ok = True
    lin_count = 0
    for perm in permutations(t35):
        respects = all(
            not (e[perm[j]]["_t"] < e[perm[i]]["_t"])
            for i in range(len(perm))
            for j in range(i + 1, len(perm))
        )
        if respects:
            lin_count += 1
            lin_ok &= all(e[perm[k]]["_t"] <= e[perm[k + 1]]["_t"] for k in range(len(perm) - 1))
    check(lin_ok and lin_count >= 1, "order-35 linearizations are time-ordered traces")

    equal_pairs = []
    for c in first_seen:
        t = traces[c]
        for a in t:
            for b in t:
                if a < b and e[a]["_t"] == e[b]["_t"]:
                    equal_pairs.append((a, b))

    # derived values frozen into the Rust tests
    def case_attrs(c):
        out = {}
        for col in ["order", "time", "action", "user", "customer", "delivery", "item", "type", "life-cycle"]:
            vals = {e[i][col] for i in traces[c]}
            if len(vals) == 1 and "" not in vals:
                out[col] = vals.pop()
        return out

    def duration_h(c):
        t = traces[c]
        return (e[t[-1]]["_t"] - e[t[0]]["_t"]).total_seconds() / 3600

    action_counts = Counter(r["action"] for r in rows)
    customers = defaultdict(list)
    for r in sorted(rows, key=lambda r: (r["_t"], r["_pos"])):
        if r["customer"]:
            customers[r["customer"]].append(r["order"])

    derived = {
        "attribute_names": sorted(k for k in rows[0] if not k.startswith("_") and any(r[k] for r in rows)),
        "defined_distinct": {
            k: [sum(1 for r in rows if r[k]), len({r[k] for r in rows if r[k]})]
            for k in rows[0]
            if not k.startswith("_")
        },
        "actions": sorted({r["action"] for r in rows}),
        "users": sorted({r["user"] for r in rows}),
        "phi1_type_online_case_attr": [c for c in first_seen if case_attrs(c).get("type") == "online"],
        "phi2_first_receive_order": [c for c in first_seen if e[traces[c][0]]["action"] == "receive order"],
        "phi3_under_24h": [c for c in first_seen if duration_h(c) < 24],
        "psi1_complete_events": sum(1 for r in rows if r["life-cycle"] == "complete"),
        "psi2_delivery_defined": sum(1 for r in rows if r["delivery"]),
        "psi3_type_online_events": sum(1 for r in rows if r["type"] == "online"),
        "psi4_alice_or_bob_events": sum(1 for r in rows if r["user"] in ("Alice", "Bob")),
        "psi5_last_occurrence_events": sum(
            1
            for c in first_seen
            for k, i in enumerate(traces[c])
            if all(e[j]["action"] != e[i]["action"] for j in traces[c][k + 1:])
        ),
        "psi6_action_freq_ge5_events": sum(1 for r in rows if action_counts[r["action"]] >= 5),
        "action_counts": dict(sorted(action_counts.items())),
        "customer_order_variants": {k: v for k, v in sorted(customers.items())},
        "case_attrs": {c: case_attrs(c) for c in first_seen},
        "equal_time_pairs_within_case": equal_pairs,
        "order35_linearizations": lin_count,
    }
    print(json.dumps(derived, indent=1))


if __name__ == "__main__":
    main()
