"""Seeded random surface-AST generator.

Used by the parser round-trip tests: any Program this module produces
must print to text that reparses to an equal AST.  The generator stays
inside the surface language (no kernel-only nodes) and produces rules
that pass the parser's safety checks: conclusion variables bound by a
positive hypothesis, negated hypotheses over bound variables only, one
arity per predicate.
"""

import random

from alda.astnodes import (
    Agg, Assign, Block, BoolOp, Call, CallStmt, ClassDef, Comprehension,
    For, If, IfSome, InferExpr, InferStmt, InOp, IsInst, IsOp, IsTuple,
    Iterator, KwArg, LenOp, Lit, LoadFacts, MethodDef, Name, NewStmt, Not,
    PatBound, PatExpr, PatTuple, PatVar, PatWild, Plus, PrintStmt, Program,
    QBound, QConst, Query, QVar, QWild, Quant, RArgConst, RArgVar, RawPred,
    Return, Rule, RuleAtom, RuleHyp, RuleSet, SelfExpr, SeqLit, Select, SetLit,
    Skip, SuperCall, TField, TName, TTuple, TupleExpr, While, WhileSome,
)

VARS = ("a", "b", "c", "x", "y", "z", "w")
PREDS = ("p", "q", "price", "edge", "link")
GNAMES = ("S", "T", "U", "g1", "g2", "obj")
FIELDS = ("val", "dat", "left", "right")
METHODS = ("m1", "m2", "go", "tick")
FUNCS = ("f1", "f2", "helper")
CLASSES = ("K1", "K2", "K3")
RSETS = ("rs1", "rs2", "rs3")
STRINGS = ("", "a", "ab", "x'y", "li\nne", "ba\\ck")

# one arity per predicate, program wide, to satisfy the arity check
ARITY = {p: 1 + i % 2 for i, p in enumerate(PREDS)}


class Fuzz:
    def __init__(self, rng: random.Random):
        self.r = rng

    def pick(self, xs):
        return self.r.choice(xs)

    def maybe(self, p=0.5):
        return self.r.random() < p

    # ------------------------------------------------------- expressions

    def lit(self):
        k = self.r.randrange(6)
        if k == 0:
            return Lit(None)
        if k == 1:
            return Lit(self.maybe())
        if k <= 3:
            return Lit(self.r.randint(-40, 99))
        return Lit(self.pick(STRINGS))

    def atom(self, env):
        k = self.r.randrange(4)
        if k == 0:
            return self.lit()
        if k == 1 and env.get("in_method"):
            return SelfExpr()
        return Name(self.pick(GNAMES + VARS))

    def expr(self, d, env):
        if d <= 0:
            return self.atom(env)
        k = self.r.randrange(19)
        sub = lambda: self.expr(d - 1, env)  # noqa: E731
        if k == 0:
            n = self.r.randrange(4)
            return TupleExpr(tuple(sub() for _ in range(n)))
        if k == 1:
            return SetLit(tuple(sub() for _ in range(self.r.randrange(3))))
        if k == 2:
            return SeqLit(tuple(sub() for _ in range(self.r.randrange(3))))
        if k == 3:
            return Not(sub())
        if k == 4:
            return BoolOp(self.pick(("and", "or")), sub(), sub())
        if k == 5:
            return IsOp(sub(), sub())
        if k == 6:
            return InOp(sub(), sub(), negated=self.maybe(0.3))
        if k == 7:
            return Plus(sub(), sub())
        if k == 8:
            return IsTuple(sub())
        if k == 9:
            return LenOp(sub())
        if k == 10:
            return Select(sub(), sub())
        if k == 11:
            return IsInst(sub(), self.pick(CLASSES + ("set", "sequence")))
        if k == 12:
            return Agg(self.pick(("count", "max", "min", "sum")), sub())
        if k == 13:
            return Quant(self.pick(("some", "each")), self.iters(d - 1, env),
                         sub())
        if k == 14:
            cond = Lit(True) if self.maybe(0.3) else sub()
            return Comprehension(sub(), self.iters(d - 1, env), cond)
        if k == 15:
            target = None if self.maybe(0.4) else sub()
            name = self.pick(FUNCS if target is None else METHODS)
            args = tuple(sub() for _ in range(self.r.randrange(3)))
            return Call(target, name, args)
        if k == 16 and env.get("in_method"):
            return SuperCall(self.pick(METHODS),
                             tuple(sub() for _ in range(self.r.randrange(2))))
        if k == 17:
            return LoadFacts(sub())
        if k == 18:
            return self.infer_expr(d - 1, env)
        return self.atom(env)

    def iters(self, d, env, n=None):
        n = n or self.r.randrange(1, 3)
        return tuple(
            Iterator(self.pattern(top=True), self.expr(d, env))
            for _ in range(n)
        )

    def pattern(self, top=False):
        if top and self.maybe(0.3):
            n = self.r.randrange(1, 4)
            return PatTuple(tuple(self.pattern() for _ in range(n)))
        if top:
            return PatVar(self.pick(VARS))
        k = self.r.randrange(5)
        if k == 0:
            return PatWild()
        if k == 1:
            return PatBound(self.pick(VARS))
        if k == 2:
            return PatExpr(self.lit())
        if k == 3:
            n = self.r.randrange(1, 3)
            return PatTuple(tuple(self.pattern() for _ in range(n)))
        return PatVar(self.pick(VARS))

    # ------------------------------------------------------------ infer

    def query(self):
        pred = RawPred(False, (self.pick(PREDS),))
        if self.maybe(0.3):
            return Query(pred, None)
        args = []
        for _ in range(self.r.randrange(1, 4)):
            k = self.r.randrange(4)
            if k == 0:
                args.append(QVar(self.pick(VARS)))
            elif k == 1:
                args.append(QBound(self.pick(VARS)))
            elif k == 2:
                args.append(QWild())
            else:
                args.append(QConst(self.r.randint(0, 9)))
        return Query(pred, tuple(args))

    def kwargs(self, d, env):
        names = self.r.sample(PREDS, self.r.randrange(3))
        return tuple(KwArg(n, self.expr(d, env)) for n in names)

    def infer_expr(self, d, env):
        obj = Name(self.pick(GNAMES)) if self.maybe(0.3) else None
        queries = tuple(self.query() for _ in range(self.r.randrange(1, 3)))
        return InferExpr(obj, queries, self.kwargs(d, env), self.pick(RSETS))

    # -------------------------------------------------------- statements

    def target(self, env):
        k = self.r.randrange(4)
        if k == 0:
            obj = SelfExpr() if env.get("in_method") and self.maybe() \
                else Name(self.pick(GNAMES))
            return TField(obj, self.pick(FIELDS))
        if k == 1:
            n = self.r.randrange(1, 3)
            return TTuple(tuple(TName(self.pick(VARS)) for _ in range(n)))
        return TName(self.pick(GNAMES + VARS))

    def stmt(self, d, env):
        k = self.r.randrange(12 if env.get("in_method") else 11)
        sub = lambda: self.expr(max(d - 1, 0), env)  # noqa: E731

        def value():
            # assign-of-infer is its own statement form, not an Assign
            for _ in range(5):
                e = sub()
                if not isinstance(e, InferExpr):
                    return e
            return self.atom(env)

        if k == 0:
            return Skip()
        if k == 1:
            if self.maybe(0.25):
                return Assign((self.target(env), self.target(env)),
                              (value(), value()))
            return Assign((self.target(env),), (value(),))
        if k == 2:
            if self.maybe():
                return NewStmt(self.target(env),
                               self.pick(("set", "sequence")), None)
            args = None if self.maybe(0.4) else tuple(
                sub() for _ in range(self.r.randrange(3)))
            return NewStmt(self.target(env), self.pick(CLASSES), args)
        if k == 3:
            targets = tuple(self.target(env)
                            for _ in range(self.r.randrange(3)))
            queries = tuple(self.query()
                            for _ in range(self.r.randrange(len(targets) or 1,
                                                            3)))
            obj = Name(self.pick(GNAMES)) if self.maybe(0.3) else None
            return InferStmt(targets, obj, queries, self.kwargs(d - 1, env),
                             self.pick(RSETS))
        if k == 4:
            call = self.expr(0, env)
            target = None if self.maybe(0.4) else call
            name = self.pick(FUNCS if target is None else METHODS + ("add", "del"))
            return CallStmt(Call(target, name,
                                 tuple(sub() for _ in range(self.r.randrange(3)))))
        if k == 5:
            return PrintStmt(sub())
        if k == 6:
            els = Block((Skip(),)) if self.maybe() else self.block(d - 1, env)
            return If(sub(), self.block(d - 1, env), els)
        if k == 7:
            return While(sub(), self.block(d - 1, env))
        if k == 8:
            return For(Iterator(self.pattern(top=True), sub()),
                       self.block(d - 1, env))
        if k == 9:
            cond = Lit(True) if self.maybe(0.3) else sub()
            return IfSome(self.iters(d - 1, env), cond, self.block(d - 1, env))
        if k == 10:
            cond = Lit(True) if self.maybe(0.3) else sub()
            return WhileSome(self.iters(d - 1, env), cond,
                             self.block(d - 1, env))
        return Return(None if self.maybe(0.3) else sub())

    def block(self, d, env):
        n = self.r.randrange(1, 3 if d <= 0 else 4)
        return Block(tuple(self.stmt(max(d, 0), env) for _ in range(n)))

    # ------------------------------------------------------------ rules

    def rule(self, in_class):
        def pred():
            name = self.pick(PREDS)
            if in_class and self.maybe(0.4):
                return RawPred(True, (name,)), ARITY[name]
            return RawPred(False, (name,)), ARITY[name]

        cp, ca = pred()
        concl_vars = self.r.sample(VARS[:3], min(ca, 2))
        concl_args = tuple(
            RArgVar(concl_vars[i % len(concl_vars)]) if self.maybe(0.85)
            else RArgConst(self.r.randint(0, 9))
            for i in range(ca)
        )
        need = {a.name for a in concl_args if isinstance(a, RArgVar)}
        hyps = []
        # one positive hypothesis binds every conclusion variable
        hp, ha = pred()
        binder_vars = list(need) or [self.pick(VARS)]
        while len(binder_vars) < ha:
            binder_vars.append(self.pick(VARS[:4]))
        hyps.append(RuleHyp(RuleAtom(hp, tuple(RArgVar(v)
                                               for v in binder_vars[:ha]))))
        bound = {v for v in binder_vars[:ha]}
        if need - bound:  # arity too small to cover; widen with a second
            extra = sorted(need - bound)
            wname = self.pick(PREDS)
            hyps.append(RuleHyp(RuleAtom(
                RawPred(False, (wname,)),
                tuple(RArgVar(v) for v in (extra * 3)[: ARITY[wname]]))))
            bound |= {v for v in (extra * 3)[: ARITY[wname]]}
        for _ in range(self.r.randrange(2)):
            ep, ea = pred()
            if self.maybe(0.7):
                args = tuple(
                    RArgVar(self.pick(sorted(bound) + ["_"]))
                    if self.maybe(0.8) else RArgConst(self.r.randint(0, 9))
                    for _ in range(ea)
                )
                hyps.append(RuleHyp(RuleAtom(ep, args)))
                bound |= {a.name for a in args
                          if isinstance(a, RArgVar) and a.name != "_"}
            else:
                args = tuple(
                    RArgVar(self.pick(sorted(bound)))
                    if bound and self.maybe(0.8)
                    else RArgConst(self.r.randint(0, 9))
                    for _ in range(ea)
                )
                hyps.append(RuleHyp(RuleAtom(ep, args), positive=False))
        return Rule(RuleAtom(cp, concl_args), tuple(hyps))

    def ruleset(self, name, in_class=False):
        rules = tuple(self.rule(in_class)
                      for _ in range(self.r.randrange(1, 4)))
        return RuleSet(name, rules)

    # ---------------------------------------------------------- program

    def method(self, name, env):
        params = tuple(self.r.sample(VARS, self.r.randrange(3)))
        if self.maybe(0.2):
            return MethodDef(name, params,
                             Block((Return(self.expr(1, env)),)),
                             is_defun=True)
        return MethodDef(name, params, self.block(1, env))

    def classdef(self, name, parent):
        env = {"in_method": True}
        rulesets = ()
        if self.maybe(0.5):
            rulesets = (self.ruleset(self.pick(RSETS), in_class=True),)
        methods = tuple(
            self.method(m, env)
            for m in self.r.sample(METHODS, self.r.randrange(1, 3))
        )
        return ClassDef(name, parent, rulesets, methods)

    def program(self):
        rulesets = tuple(
            self.ruleset(name)
            for name in self.r.sample(RSETS, self.r.randrange(3))
        )
        classes = []
        for i in range(self.r.randrange(3)):
            parent = classes[-1].name if classes and self.maybe(0.3) else None
            classes.append(self.classdef(CLASSES[i], parent))
        top = self.block(2, {})
        return Program(rulesets, tuple(classes), top)


def random_programs(seed: int, count: int):
    rng = random.Random(seed)
    f = Fuzz(rng)
    return [f.program() for _ in range(count)]
