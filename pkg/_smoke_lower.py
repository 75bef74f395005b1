import sys
sys.path.insert(0, "src")

from alda.parser import parse_program
from alda.lowering import lower, GLOBALS_CLASS
from alda.errors import UpdateDisciplineError

UNION = """
class CoreRBAC:
    def setup():
        self.USERS, self.ROLES, self.UR := {}, {}, {}

    def AddRole(role):
        ROLES.add(role)

    def AssignedUsers(role):
        return {u: u in USERS | (u, role) in UR}

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

h := new(HierRBAC, [])
h.AddRole("chair")
h.AddInheritance("chair", "faculty")
print(h.AuthorizedUsers("chair"))
"""

NONLOC = """
class CoreRBAC:
    def setup():
        self.USERS, self.ROLES, self.UR := {}, {}, {}

    def AddRole(role):
        ROLES.add(role)

class HierRBAC extends CoreRBAC:
    def setup():
        super().setup()
        self.RH := {}

    rules trans_rs:
        self.transRH(x, y) if self.RH(x, y)
        self.transRH(x, y) if self.RH(x, z), self.transRH(z, y)
        self.transRH(x, x) if self.ROLES(x)

    def AddInheritance(a, d):
        RH.add((a, d))

    def AuthorizedUsers(role):
        return {u: u in USERS, r in ROLES | (u, r) in UR and (r, role) in transRH}

h := new(HierRBAC, [])
h.AddRole("chair")
"""

BAD_SELF = NONLOC.replace(
    "    def AddInheritance(a, d):",
    "    def Clobber():\n        self.transRH := {}\n\n    def AddInheritance(a, d):")

BAD_GLOBAL = """
rules g_rs:
    tc(x, y) if link(x, y)
    tc(x, y) if link(x, z), tc(z, y)

link := {(1, 2)}
tc := {}
"""

ALIASED = NONLOC + "\nh.transRH := {}\n"

for label, src in [("union", UNION), ("nonloc", NONLOC)]:
    kp = lower(parse_program(src))
    print(f"== {label} ==")
    print("rulesets:", sorted(kp.rulesets))
    rs = next(iter(kp.rulesets.values()))
    print("  base:", sorted(p.key() for p in rs.base),
          "derived:", sorted(p.key() for p in rs.derived))
    print("  nl_base:", sorted(p.key() for p in rs.nl_base),
          "nl_derived:", sorted(p.key() for p in rs.nl_derived))
    for s in kp.sites:
        print("  site", s.line, s.kind, s.detail, s.classification, s.rulesets)
    print("  maintain stmts:", len(kp.maintain_stmts))

for label, src in [("self write", BAD_SELF), ("global write", BAD_GLOBAL)]:
    print(f"== bad {label} ==")
    try:
        lower(parse_program(src))
        print("  NOT CAUGHT")
    except UpdateDisciplineError as e:
        print("  UpdateDisciplineError:", e)

print("== aliased write (runtime's job) ==")
kp = lower(parse_program(ALIASED))
for s in kp.sites:
    if s.detail == "transRH":
        print("  site", s.line, s.kind, s.detail, s.classification, s.rulesets)
