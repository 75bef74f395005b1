"""Benchmark suites: transitive closure and role-based access control.

Each suite asserts its own correctness condition before reporting times,
so a benchmark run doubles as an end-to-end check.
"""

import random
import time

from .heap import elements_to_facts
from .runtime import run_text

TC_SRC = """\
rules trans_rs:
    path(x, y) if edge(x, y)
    path(x, y) if edge(x, z), path(z, y)

n := count(path)
"""

# same closure, recursive rule hypotheses in the opposite order
TC_REV_SRC = """\
rules trans_rs:
    path(x, y) if edge(x, y)
    path(x, y) if path(z, y), edge(x, z)

n := count(path)
"""


def _closure(src: str, edges) -> tuple[frozenset, int, float]:
    t0 = time.perf_counter()
    interp = run_text(src, facts={"edge": edges})
    dt = time.perf_counter() - t0
    addr = interp.global_value("path")
    pairs = elements_to_facts(interp.heap.set_elements(addr), 2)
    return frozenset(pairs), interp.global_value("n"), dt


def bench_tc(n: int, reverse: bool = False, repeat: int = 1) -> dict:
    """Closure of an n-cycle; must contain exactly n*n pairs."""
    edges = [(i, (i + 1) % n) for i in range(n)]
    src = TC_REV_SRC if reverse else TC_SRC
    times = []
    closure = None
    for _ in range(max(1, repeat)):
        closure, card, dt = _closure(src, edges)
        assert card == n * n, f"closure of {n}-cycle has {card} pairs"
        times.append(dt)
    if reverse:
        forward, _, _ = _closure(TC_SRC, edges)
        assert closure == forward, "reversed rule changed the closure"
    return {
        "suite": "tc-rev" if reverse else "tc",
        "n": n,
        "pairs": n * n,
        "runs": len(times),
        "seconds": min(times),
    }


# Three ways to write hierarchical RBAC with the same observable behavior:
# all predicates local to the rule set, all predicates object fields, and
# local predicates with the reflexive pairs unioned in afterwards.

_CORE = """\
class CoreRBAC:
    def setup():
        self.USERS, self.ROLES, self.UR := {}, {}, {}

    def AddUser(user):
        USERS.add(user)

    def AddRole(role):
        ROLES.add(role)

    def AssignUser(user, role):
        UR.add((user, role))

    def AssignedUsers(role):
        return {u: u in USERS | (u, role) in UR}
"""

RBAC_UNION = _CORE + """
class HierRBAC extends CoreRBAC:
    def setup():
        super().setup()
        self.RH := {}

    def AddInheritance(a, d):
        RH.add((a, d))

    rules trans_rs:
        path(x, y) if edge(x, y)
        path(x, y) if edge(x, z), path(z, y)

    def transRH():
        return infer(path, edge=RH, rules=trans_rs) + {(r, r): r in ROLES}

    def AuthorizedUsers(role):
        return {u: u in USERS, r in ROLES | (u, r) in UR and (r, role) in transRH()}
"""

RBAC_ALLLOC = _CORE + """
class HierRBAC extends CoreRBAC:
    def setup():
        super().setup()
        self.RH := {}

    def AddInheritance(a, d):
        RH.add((a, d))

    rules trans_rs:
        path(x, y) if edge(x, y)
        path(x, y) if edge(x, z), path(z, y)
        path(x, x) if role(x)

    def transRH():
        return infer(path, edge=RH, role=ROLES, rules=trans_rs)

    def AuthorizedUsers(role):
        return {u: u in USERS, r in ROLES | (u, r) in UR and (r, role) in transRH()}
"""

RBAC_NONLOC = _CORE + """
class HierRBAC extends CoreRBAC:
    def setup():
        super().setup()
        self.RH := {}

    def AddInheritance(a, d):
        RH.add((a, d))

    rules trans_rs:
        self.transRH(x, y) if self.RH(x, y)
        self.transRH(x, y) if self.RH(x, z), self.transRH(z, y)
        self.transRH(x, x) if self.ROLES(x)

    def AuthorizedUsers(role):
        return {u: u in USERS, r in ROLES | (u, r) in UR and (r, role) in transRH}
"""

RBAC_VARIANTS = {
    "allloc": RBAC_ALLLOC,
    "nonloc": RBAC_NONLOC,
    "union": RBAC_UNION,
}


def make_rbac_driver(users: int, roles: int, updates: int, seed: int) -> str:
    """Deterministic call sequence exercising one HierRBAC instance."""
    rng = random.Random(seed)
    lines = ["h := new(HierRBAC, [])"]
    role_names = [f"r{i}" for i in range(roles)]
    user_names = [f"u{i}" for i in range(users)]
    for r in role_names:
        lines.append(f"h.AddRole('{r}')")
    for u in user_names:
        lines.append(f"h.AddUser('{u}')")
        for r in rng.sample(role_names, rng.randint(1, min(2, roles))):
            lines.append(f"h.AssignUser('{u}', '{r}')")
    for _ in range(updates):
        a, d = rng.sample(role_names, 2)
        lines.append(f"h.AddInheritance('{a}', '{d}')")
    for i, r in enumerate(role_names):
        lines.append(f"a{i} := h.AuthorizedUsers('{r}')")
    return "\n".join(lines) + "\n"


def run_rbac_variant(variant_src: str, driver: str, roles: int):
    """-> (per-role authorized user sets, wall seconds)"""
    t0 = time.perf_counter()
    interp = run_text(variant_src + "\n" + driver)
    dt = time.perf_counter() - t0
    answers = []
    for i in range(roles):
        addr = interp.global_value(f"a{i}")
        answers.append(frozenset(interp.heap.set_elements(addr)))
    return answers, dt


def bench_rbac(users: int, roles: int, updates: int, seed: int = 0,
               repeat: int = 1) -> dict:
    if roles < 2:
        raise ValueError("rbac suite needs at least 2 roles")
    driver = make_rbac_driver(users, roles, updates, seed)
    timings = {}
    baseline = None
    for name, src in RBAC_VARIANTS.items():
        best = None
        for _ in range(max(1, repeat)):
            answers, dt = run_rbac_variant(src, driver, roles)
            best = dt if best is None else min(best, dt)
        if baseline is None:
            baseline = answers
        else:
            assert answers == baseline, f"variant {name} disagrees"
        timings[name] = best
    return {
        "suite": "rbac",
        "users": users,
        "roles": roles,
        "updates": updates,
        "seed": seed,
        "authorized_total": sum(len(s) for s in baseline),
        "identical": True,
        "seconds": timings,
    }


def format_report(report: dict) -> list[str]:
    lines = []
    if report["suite"] in ("tc", "tc-rev"):
        lines.append(f"suite {report['suite']}: n={report['n']} "
                     f"pairs={report['pairs']} runs={report['runs']}")
        lines.append(f"  time: {report['seconds']:.3f}s")
    else:
        lines.append(f"suite rbac: users={report['users']} "
                     f"roles={report['roles']} updates={report['updates']} "
                     f"seed={report['seed']}")
        lines.append(f"  variants agree on {report['authorized_total']} "
                     f"authorizations")
        for name, dt in report["seconds"].items():
            lines.append(f"  {name}: {dt:.3f}s")
    return lines
