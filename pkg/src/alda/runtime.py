"""Big-step interpreter with integrated rule-set maintenance.

Derived predicates live on the heap as protected set objects hanging off
the object that bears the rule set (an instance for class rule sets, the
globals record otherwise).  Whenever an update can change something a
rule set depends on, every registered (rule set, bearer) pair is
re-derived bottom-up against the current heap, batched per round, until
a round changes nothing.  A fingerprint of each pair's base values skips
the pairs whose inputs did not move.

`infer` additionally feeds local facts from keyword arguments, stores
the defined non-local derived predicates, aliases queried non-local
results, and snapshots queried local results into fresh sets.
"""

import sys

from .analysis import ResolvedRuleSet, fully_depends
from .astnodes import (
    Agg,
    Assign,
    Block,
    BoolOp,
    Call,
    CallStmt,
    Comprehension,
    FieldAccess,
    For,
    GvRef,
    If,
    InOp,
    InferStmt,
    IsInst,
    IsOp,
    IsTuple,
    LenOp,
    Lit,
    LoadFacts,
    LocalRef,
    NewStmt,
    Not,
    PatExpr,
    PatTuple,
    PatVar,
    PatWild,
    Plus,
    PrintStmt,
    Quant,
    Query,
    RawPred,
    Return,
    Select,
    SelfExpr,
    SeqLit,
    SetLit,
    Skip,
    SuperCall,
    TupleExpr,
    While,
)
from .errors import (
    ArityMismatch,
    BaseNotASet,
    DerivedWrite,
    EmptyAggregate,
    IndexOutOfRange,
    IntOverflow,
    MaintenanceDivergence,
    MethodUndefined,
    NotABasePredicate,
    NotATuple,
    TypeFault,
    UndefinedPredicate,
    UnknownRuleSet,
)
from .engine import compile_rules, eval_rules
from .facts import load_fact_file
from .heap import (
    SEQ_TYPE,
    SET_TYPE,
    Heap,
    elements_to_facts,
    facts_to_elements,
)
from .lowering import GLOBALS_CLASS, KernelProgram
from .values import (
    INT_MAX,
    INT_MIN,
    Addr,
    render_scalar,
    sort_key,
    structural_equal,
)

MAINTAIN_MAX_ROUNDS = 1000


def run_text(source: str, maintain_mode: str = "classified", out=None,
             facts: dict | None = None, trace=None) -> "Interp":
    """Parse, lower, and execute a whole program.

    facts maps global names to element iterables bound before the first
    statement, the way the command line binds fact files.
    """
    from .lowering import lower
    from .parser import parse_program

    prog = parse_program(source)
    kp = lower(prog, extra_globals=tuple(facts) if facts else ())
    interp = Interp(kp, maintain_mode=maintain_mode, trace=trace, out=out)
    for name, elements in (facts or {}).items():
        interp.assign_global(name, interp.heap.new_set(elements))
    interp.run()
    return interp


class _Return(Exception):
    def __init__(self, value):
        self.value = value


def _lc(node):
    if node is not None and getattr(node, "loc", None) is not None:
        return node.loc.line, node.loc.col
    return None, None


class Interp:
    """Executes one lowered program.

    maintain_mode 'classified' runs maintenance only at update sites the
    static analysis could not clear; 'every' runs it at every update.
    The two must be observationally equivalent.
    """

    def __init__(self, kp: KernelProgram, maintain_mode: str = "classified",
                 trace=None, out=None):
        assert maintain_mode in ("classified", "every")
        self.kp = kp
        self.heap = Heap()
        self.mode = maintain_mode
        self.trace = trace
        self.out = out if out is not None else sys.stdout
        self.compiled = {u: compile_rules(rs) for u, rs in kp.rulesets.items()}
        # derived predicates a maintenance pass stores, per rule set:
        # the non-local ones that never need local facts
        self.maintained: dict[str, list] = {}
        for u, rs in kp.rulesets.items():
            defined = fully_depends(rs, {p.key() for p in rs.nl_base})
            self.maintained[u] = [p for p in rs.nl_derived
                                  if p.key() in defined]
        self._defined_cache: dict[tuple[str, frozenset], set[str]] = {}
        # every address that bears a rule set, in creation order
        self.instances: dict[str, list[Addr]] = {u: [] for u in kp.rulesets}
        # (bearer index, rule set) -> base fingerprint used last time
        self.memo: dict[tuple[int, str], tuple] = {}
        self._stmt = None
        self.a_gv = self.heap.new_record(GLOBALS_CLASS)
        self._register(self.a_gv, GLOBALS_CLASS)

    # ---------------------------------------------------------- driving

    def run(self):
        # define derived globals before the first statement runs
        self.maintain()
        self.exec_block(self.kp.top, {})

    def assign_global(self, name: str, value):
        """Bind one global as if by a top-level assignment."""
        if (self.a_gv, name) in self.heap.derived_slots:
            raise DerivedWrite(f"update of derived predicate {name}")
        self.heap.obj(self.a_gv).fields[name] = value
        self.maintain()

    def global_value(self, name: str):
        return self.heap.get_field(self.a_gv, name)

    # ------------------------------------------------------ maintenance

    def _register(self, addr: Addr, cname: str):
        for u in self.kp.closure_rulesets(cname):
            self.instances[u].append(addr)
            for p in self.kp.rulesets[u].nl_derived:
                self.heap.derived_slots.add((addr, p.name))

    def _basis(self, bearer: Addr, rs: ResolvedRuleSet) -> tuple:
        fps = []
        for p in rs.nl_base:
            root = bearer if p.root == "self" else self.a_gv
            v = self.heap.deref(root, (p.name,) + p.path)
            fps.append(self.heap.fingerprint(v))
        return tuple(fps)

    def _inf_results(self, bearer: Addr, rs: ResolvedRuleSet, u: str,
                     facts_l: dict[str, Addr]) -> dict[str, set]:
        """One inference pass: the model restricted to the derived
        predicates that are defined given the facts at hand."""
        facts: dict[str, set] = {}
        for p in rs.nl_base:
            root = bearer if p.root == "self" else self.a_gv
            v = self.heap.deref(root, (p.name,) + p.path)
            if v is None:
                rows: set = set()
            elif self.heap.is_set(v):
                rows = elements_to_facts(self.heap.set_elements(v),
                                         rs.arities[p.key()])
            else:
                raise BaseNotASet(
                    f"base predicate {p.key()} of {u} holds a non-set")
            facts[p.key()] = rows
        for name, addr in facts_l.items():
            facts[name] = elements_to_facts(self.heap.set_elements(addr),
                                            rs.arities[name])
        model = eval_rules(self.compiled[u], facts)
        return {k: model[k] for k in self._defined(u, frozenset(facts_l))}

    def _defined(self, u: str, kwnames: frozenset) -> set[str]:
        got = self._defined_cache.get((u, kwnames))
        if got is None:
            rs = self.kp.rulesets[u]
            given = {p.key() for p in rs.nl_base} | set(kwnames)
            got = fully_depends(rs, given)
            self._defined_cache[(u, kwnames)] = got
        return got

    def _derived_sizes(self, bearer: Addr, preds) -> dict[str, int]:
        rec = self.heap.obj(bearer)
        return {p.name: (len(self.heap.obj(rec.fields[p.name]))
                         if p.name in rec.fields else 0)
                for p in preds}

    def _store_derived(self, bearer: Addr, rs: ResolvedRuleSet, preds,
                       results: dict[str, set]) -> bool:
        changed = False
        rec = self.heap.obj(bearer)
        for p in preds:
            elems = facts_to_elements(results[p.key()], rs.arities[p.key()])
            cur = rec.fields.get(p.name)
            if cur is not None and self.heap.is_set(cur):
                if self.heap.obj(cur).replace_contents(elems):
                    changed = True
            else:
                # first derivation: allocate the protected result set
                na = self.heap.new_set(elems)
                self.heap.derived_set_addrs.add(na)
                rec.fields[p.name] = na
                changed = True
        return changed

    def maintain(self):
        for rnd in range(MAINTAIN_MAX_ROUNDS):
            pending = []
            for u, rs in self.kp.rulesets.items():
                preds = self.maintained[u]
                if not preds:
                    continue
                for bearer in self.instances[u]:
                    fp = self._basis(bearer, rs)
                    if self.memo.get((bearer.index, u)) == fp:
                        continue
                    results = self._inf_results(bearer, rs, u, {})
                    pending.append((bearer, u, rs, preds, results, fp))
            if not pending:
                return
            # apply the whole round at once, then re-check fingerprints
            changed = False
            for bearer, u, rs, preds, results, fp in pending:
                before = self._derived_sizes(bearer, preds) if self.trace \
                    else None
                if self._store_derived(bearer, rs, preds, results):
                    changed = True
                self.memo[(bearer.index, u)] = fp
                if self.trace:
                    after = self._derived_sizes(bearer, preds)
                    deltas = " ".join(
                        f"{p.name}{after[p.name] - before[p.name]:+d}"
                        f"(|{after[p.name]}|)" for p in preds)
                    self.trace(f"maintain {u} on #{bearer.index}: {deltas}")
            if not changed:
                return
        raise MaintenanceDivergence(
            f"maintenance did not settle in {MAINTAIN_MAX_ROUNDS} rounds")

    def _after_update(self):
        if self.mode == "every" or (
                self._stmt is not None
                and id(self._stmt) in self.kp.maintain_stmts):
            self.maintain()

    # ------------------------------------------------------- statements

    def exec_block(self, b: Block, frame: dict):
        for s in b.stmts:
            self.exec_stmt(s, frame)

    def exec_stmt(self, s, frame: dict):
        prev = self._stmt
        self._stmt = s
        try:
            self._stmt_dispatch(s, frame)
        finally:
            self._stmt = prev

    def _stmt_dispatch(self, s, frame: dict):
        if isinstance(s, Skip):
            return
        if isinstance(s, Assign):
            t = s.targets[0]
            recv = self.eval(t.obj, frame)
            self._check_write(recv, t.field, s)
            v = self.eval(s.values[0], frame)
            self.heap.obj(recv).fields[t.field] = v
            self._after_update()
            return
        if isinstance(s, NewStmt):
            recv = self.eval(s.target.obj, frame)
            self._check_write(recv, s.target.field, s)
            if s.class_name == "set":
                addr = self.heap.new_set()
            elif s.class_name == "sequence":
                addr = self.heap.new_seq()
            else:
                addr = self.heap.new_record(s.class_name)
                self._register(addr, s.class_name)
            self.heap.obj(recv).fields[s.target.field] = addr
            self._after_update()
            return
        if isinstance(s, InferStmt):
            self.exec_infer(s, frame)
            return
        if isinstance(s, CallStmt):
            self.eval(s.call, frame)
            return
        if isinstance(s, PrintStmt):
            v = self.eval(s.e, frame)
            self.out.write(self.render(v) + "\n")
            return
        if isinstance(s, If):
            c = self._bool(self.eval(s.cond, frame), "if condition", s)
            self.exec_block(s.then if c else s.els, frame)
            return
        if isinstance(s, While):
            while self._bool(self.eval(s.cond, frame), "while condition", s):
                self.exec_block(s.body, frame)
            return
        if isinstance(s, For):
            items = self._iterable(self.eval(s.iter.source, frame), s.iter)
            name = s.iter.pattern.name
            for v in items:
                frame[name] = v
                self.exec_block(s.body, frame)
            return
        if isinstance(s, Return):
            raise _Return(self.eval(s.e, frame) if s.e is not None else None)
        raise AssertionError(f"statement {s!r} survived lowering")

    def _check_write(self, recv, field: str, s):
        if not self.heap.is_record(recv):
            raise TypeFault("field assignment on a non-object", *_lc(s))
        if (recv, field) in self.heap.derived_slots:
            raise DerivedWrite(f"update of derived predicate {field}",
                               *_lc(s))

    # ------------------------------------------------------------ infer

    def exec_infer(self, s: InferStmt, frame: dict):
        line, col = _lc(s)
        # receivers left to right, then the object, then keyword values
        taddrs = []
        for t in s.targets:
            recv = self.eval(t.obj, frame)
            self._check_write(recv, t.field, s)
            taddrs.append((recv, t.field))
        obj = self.eval(s.obj, frame)
        if not self.heap.is_record(obj):
            raise TypeFault("infer needs an object", line, col)
        cname = self.heap.type_of(obj)
        u = self.kp.find_ruleset(cname, s.ruleset)
        if u is None:
            raise UnknownRuleSet(f"no rule set {s.ruleset} for {cname}",
                                 line, col)
        rs = self.kp.rulesets[u]
        bearer = self.a_gv if self.kp.ruleset_scope[u] == "global" else obj

        local_bases = {p.name for p in rs.local_base}
        facts_l: dict[str, Addr] = {}
        for kw in s.kwargs:
            if kw.name not in local_bases:
                raise NotABasePredicate(
                    f"{kw.name} is not a local base predicate of {s.ruleset}",
                    line, col)
            v = self.eval(kw.value, frame)
            if not self.heap.is_set(v):
                raise BaseNotASet(
                    f"keyword argument {kw.name} must be a set", line, col)
            facts_l[kw.name] = v

        defined = self._defined(u, frozenset(facts_l))
        qkeys = [self._query_key(q, rs, s.ruleset) for q in s.queries]
        for q, key in zip(s.queries, qkeys):
            if key not in defined:
                raise UndefinedPredicate(
                    f"{key} is undefined here: its local base facts were "
                    f"not all supplied", *_lc(q))

        results = self._inf_results(bearer, rs, u, facts_l)
        nl_keys = {p.key() for p in rs.nl_derived}
        self._store_derived(bearer, rs,
                            [p for p in rs.nl_derived if p.key() in defined],
                            results)
        for (recv, fname), key in zip(taddrs, qkeys):
            if key in nl_keys:
                # alias the maintained result set itself
                name = key[5:] if key.startswith("self.") else key
                val = self.heap.obj(bearer).fields[name]
            else:
                # local result: a fresh, unprotected snapshot
                val = self.heap.new_set(
                    facts_to_elements(results[key], rs.arities[key]))
            self.heap.obj(recv).fields[fname] = val
        self.maintain()

    def _query_key(self, q: Query, rs: ResolvedRuleSet, rsname: str) -> str:
        p = q.pred
        assert isinstance(p, RawPred)
        shown = ("self." if p.is_self else "") + ".".join(p.parts)
        if p.is_self:
            if len(p.parts) != 1:
                raise UndefinedPredicate(
                    f"{shown} is not a derived predicate of {rsname}",
                    *_lc(q))
            key = "self." + p.parts[0]
        elif len(p.parts) == 1:
            key = p.parts[0]
            if key not in rs.derived_keys and "self." + key in rs.derived_keys:
                key = "self." + key
        else:
            raise UndefinedPredicate(
                f"{shown} is not a derived predicate of {rsname}", *_lc(q))
        if key not in rs.derived_keys:
            if key in rs.base_keys:
                raise UndefinedPredicate(
                    f"{shown} is a base predicate; queries take derived "
                    f"predicates", *_lc(q))
            raise UndefinedPredicate(
                f"{shown} is not a derived predicate of {rsname}", *_lc(q))
        if q.arity is not None and rs.arities[key] != q.arity:
            raise ArityMismatch(
                f"{shown} has arity {rs.arities[key]}, the query uses "
                f"{q.arity}", *_lc(q))
        return key

    # ------------------------------------------------------ expressions

    def eval(self, e, frame: dict):
        if isinstance(e, Lit):
            return e.value
        if isinstance(e, LocalRef):
            return frame[e.id]
        if isinstance(e, SelfExpr):
            return frame["self"]
        if isinstance(e, GvRef):
            return self.a_gv
        if isinstance(e, FieldAccess):
            obj = self.eval(e.obj, frame)
            if not self.heap.is_record(obj):
                raise TypeFault("field read on a non-object", *_lc(e))
            return self.heap.get_field(obj, e.field, *_lc(e))
        if isinstance(e, TupleExpr):
            return tuple(self.eval(x, frame) for x in e.items)
        if isinstance(e, SetLit):
            return self.heap.new_set(self.eval(x, frame) for x in e.items)
        if isinstance(e, SeqLit):
            return self.heap.new_seq(self.eval(x, frame) for x in e.items)
        if isinstance(e, Not):
            return not self._bool(self.eval(e.e, frame), "not", e)
        if isinstance(e, BoolOp):
            assert e.op == "or"
            left = self._bool(self.eval(e.left, frame), "or", e)
            if left:
                return True
            return self.eval(e.right, frame)
        if isinstance(e, IsOp):
            return structural_equal(self.eval(e.left, frame),
                                    self.eval(e.right, frame))
        if isinstance(e, InOp):
            assert not e.negated
            item = self.eval(e.item, frame)
            coll = self.eval(e.coll, frame)
            if self.heap.is_set(coll):
                return self.heap.obj(coll).contains(item)
            if self.heap.is_seq(coll):
                return any(structural_equal(x, item)
                           for x in self.heap.obj(coll).items)
            raise TypeFault("membership needs a set or sequence", *_lc(e))
        if isinstance(e, Plus):
            return self._plus(self.eval(e.left, frame),
                              self.eval(e.right, frame), e)
        if isinstance(e, IsTuple):
            return isinstance(self.eval(e.e, frame), tuple)
        if isinstance(e, LenOp):
            v = self.eval(e.e, frame)
            if isinstance(v, (tuple, str)):
                return len(v)
            if isinstance(v, Addr) and (self.heap.is_set(v)
                                        or self.heap.is_seq(v)):
                return len(self.heap.obj(v))
            raise TypeFault("len needs a tuple, string, set, or sequence",
                            *_lc(e))
        if isinstance(e, Select):
            v = self.eval(e.e, frame)
            i = self.eval(e.index, frame)
            if not isinstance(v, tuple):
                raise NotATuple("select needs a tuple", *_lc(e))
            if type(i) is not int:
                raise TypeFault("tuple index must be an integer", *_lc(e))
            if not 1 <= i <= len(v):
                raise IndexOutOfRange(
                    f"index {i} into a {len(v)}-tuple", *_lc(e))
            return v[i - 1]
        if isinstance(e, IsInst):
            v = self.eval(e.e, frame)
            if not isinstance(v, Addr):
                return False
            t = self.heap.type_of(v)
            if e.class_name in (SET_TYPE, SEQ_TYPE):
                return t == e.class_name
            if t in (SET_TYPE, SEQ_TYPE, GLOBALS_CLASS):
                return False
            return e.class_name in self.kp.ancestry(t)
        if isinstance(e, Agg):
            return self._agg(e, frame)
        if isinstance(e, Quant):
            return self._quant(e, frame)
        if isinstance(e, Comprehension):
            return self._comprehension(e, frame)
        if isinstance(e, LoadFacts):
            p = self.eval(e.path, frame)
            if not isinstance(p, str):
                raise TypeFault("load_facts needs a path string", *_lc(e))
            return self.heap.new_set(load_fact_file(p))
        if isinstance(e, Call):
            target = self.eval(e.target, frame)
            args = [self.eval(a, frame) for a in e.args]
            return self._call(target, e.name, args, e)
        if isinstance(e, SuperCall):
            selfv = frame["self"]
            args = [self.eval(a, frame) for a in e.args]
            start = self.kp.classes[e.from_class].parent
            found = self.kp.find_method(start, e.name)
            if found is None:
                raise MethodUndefined(
                    f"no inherited method {e.name} above {e.from_class}",
                    *_lc(e))
            return self._invoke(found[0], selfv, args, e)
        raise AssertionError(f"expression {e!r} survived lowering")

    def _bool(self, v, what: str, node) -> bool:
        if not isinstance(v, bool):
            raise TypeFault(f"{what} needs a boolean", *_lc(node))
        return v

    def _iterable(self, src, node) -> list:
        if isinstance(src, Addr) and self.heap.is_set(src):
            return self.heap.set_elements(src)
        if isinstance(src, Addr) and self.heap.is_seq(src):
            return list(self.heap.obj(src).items)
        raise TypeFault("iteration needs a set or sequence", *_lc(node))

    def _plus(self, l, r, e):
        h = self.heap
        if type(l) is int and type(r) is int:
            v = l + r
            if not INT_MIN <= v <= INT_MAX:
                raise IntOverflow(f"{l} + {r} overflows", *_lc(e))
            return v
        if isinstance(l, str) and isinstance(r, str):
            return l + r
        if isinstance(l, tuple) and isinstance(r, tuple):
            return l + r
        if h.is_set(l) and h.is_set(r):
            return h.new_set(h.set_elements(l) + h.set_elements(r))
        if h.is_seq(l) and h.is_seq(r):
            return h.new_seq(list(h.obj(l).items) + list(h.obj(r).items))
        raise TypeFault("+ needs two ints, strings, tuples, sets, or "
                        "sequences", *_lc(e))

    def _agg(self, e: Agg, frame: dict):
        items = self._iterable(self.eval(e.e, frame), e)
        if e.op == "count":
            return len(items)
        if e.op == "sum":
            total = 0
            for v in items:
                if type(v) is not int:
                    raise TypeFault("sum needs integer elements", *_lc(e))
                total += v
                if not INT_MIN <= total <= INT_MAX:
                    raise IntOverflow("sum overflows", *_lc(e))
            return total
        if not items:
            raise EmptyAggregate(f"{e.op} of an empty collection", *_lc(e))
        if all(type(v) is int for v in items):
            pass
        elif all(isinstance(v, str) for v in items):
            pass
        else:
            raise TypeFault(f"{e.op} needs all-integer or all-string "
                            f"elements", *_lc(e))
        return max(items) if e.op == "max" else min(items)

    def _quant(self, e: Quant, frame: dict):
        assert e.kind == "some" and len(e.iters) == 1
        it = e.iters[0]
        items = self._iterable(self.eval(it.source, frame), it)
        name = it.pattern.name
        try:
            for v in items:
                frame[name] = v
                if self._bool(self.eval(e.cond, frame),
                              "quantifier condition", e):
                    return True
            return False
        finally:
            frame.pop(name, None)

    def _comprehension(self, e: Comprehension, frame: dict):
        out = []

        def rec(i: int):
            if i == len(e.iters):
                if self._bool(self.eval(e.cond, frame),
                              "comprehension condition", e):
                    out.append(self.eval(e.head, frame))
                return
            it = e.iters[i]
            items = self._iterable(self.eval(it.source, frame), it)
            for v in items:
                names = self._match(it.pattern, v, frame)
                if names is None:
                    continue
                try:
                    rec(i + 1)
                finally:
                    for n in names:
                        frame.pop(n, None)

        rec(0)
        return self.heap.new_set(out)

    def _match(self, pat, v, frame: dict):
        """Match one element; binds into frame and reports the names
        bound, or None if the element does not fit."""
        binds: dict = {}
        if self._match_in(pat, v, frame, binds):
            frame.update(binds)
            return list(binds)
        return None

    def _match_in(self, pat, v, frame: dict, binds: dict) -> bool:
        if isinstance(pat, PatVar):
            if pat.name in binds:
                return structural_equal(binds[pat.name], v)
            binds[pat.name] = v
            return True
        if isinstance(pat, PatWild):
            return True
        if isinstance(pat, PatExpr):
            # resolved against the enclosing scope, so earlier iterator
            # bindings are already in the frame
            return structural_equal(self.eval(pat.e, frame), v)
        if isinstance(pat, PatTuple):
            if not isinstance(v, tuple) or len(v) != len(pat.elems):
                return False
            return all(self._match_in(p, c, frame, binds)
                       for p, c in zip(pat.elems, v))
        raise AssertionError(f"pattern {pat!r} survived lowering")

    # ----------------------------------------------------------- calls

    def _call(self, target, name: str, args: list, e):
        h = self.heap
        if isinstance(target, Addr) and h.is_set(target):
            if name in ("add", "del"):
                if len(args) != 1:
                    raise ArityMismatch(f"set {name} takes one argument",
                                        *_lc(e))
                if target in h.derived_set_addrs:
                    raise DerivedWrite(
                        f"{name} on a derived predicate's set", *_lc(e))
                obj = h.obj(target)
                changed = (obj.add(args[0]) if name == "add"
                           else obj.discard(args[0]))
                if changed:
                    self._after_update()
                return None
            if name == "any":
                if args:
                    raise ArityMismatch("set any takes no arguments", *_lc(e))
                elems = h.set_elements(target)
                if not elems:
                    return None
                return min(elems, key=sort_key)
            raise MethodUndefined(f"sets have no method {name}", *_lc(e))
        if isinstance(target, Addr) and h.is_seq(target):
            obj = h.obj(target)
            if name == "add":
                if len(args) != 1:
                    raise ArityMismatch("sequence add takes one argument",
                                        *_lc(e))
                obj.items.append(args[0])
                self._after_update()
                return None
            if name == "contains":
                if len(args) != 1:
                    raise ArityMismatch(
                        "sequence contains takes one argument", *_lc(e))
                return any(structural_equal(x, args[0]) for x in obj.items)
            if name == "length":
                if args:
                    raise ArityMismatch("sequence length takes no arguments",
                                        *_lc(e))
                return len(obj.items)
            raise MethodUndefined(f"sequences have no method {name}", *_lc(e))
        if isinstance(target, Addr) and h.is_record(target):
            found = self.kp.find_method(h.type_of(target), name)
            if found is None:
                raise MethodUndefined(
                    f"{h.type_of(target)} has no method {name}", *_lc(e))
            return self._invoke(found[0], target, args, e)
        raise TypeFault("method call on a non-object", *_lc(e))

    def _invoke(self, m, selfv, args: list, e):
        if len(args) != len(m.params):
            raise ArityMismatch(
                f"{m.name} takes {len(m.params)} arguments, got {len(args)}",
                *_lc(e))
        frame = {"self": selfv}
        frame.update(zip(m.params, args))
        try:
            self.exec_block(m.body, frame)
        except _Return as r:
            return r.value
        return None

    # -------------------------------------------------------- rendering

    def render(self, v, _seen: frozenset = frozenset()) -> str:
        if isinstance(v, Addr):
            if v.index in _seen:
                return "..."
            seen = _seen | {v.index}
            h = self.heap
            if h.is_set(v):
                elems = sorted(h.set_elements(v), key=sort_key)
                # 1-tuple elements (unary query results) display unwrapped
                elems = [x[0] if isinstance(x, tuple) and len(x) == 1 else x
                         for x in elems]
                return "{" + ", ".join(self.render(x, seen)
                                       for x in elems) + "}"
            if h.is_seq(v):
                return "[" + ", ".join(self.render(x, seen)
                                       for x in h.obj(v).items) + "]"
            return f"<{h.type_of(v)} #{v.index}>"
        if isinstance(v, tuple):
            inner = ", ".join(self.render(x, _seen) for x in v)
            return f"({inner},)" if len(v) == 1 else f"({inner})"
        return render_scalar(v)
