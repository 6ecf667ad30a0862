"""Bottom-up evaluation of positive rule programs over the fact store.

Semi-naive iteration: the first pass applies every rule to the loaded
facts, later passes only join against the facts that appeared in the
previous round.  Every successful rule instantiation is recorded as a
derivation (rule id plus premise facts in body order), deduplicated per
fact, so explanations can be extracted afterwards.

Facts are keyed ``(predicate, (sym, ...))`` with symbols from the fact
store's interner; constants appearing only in rules get local overlay
symbols so a shared store is never mutated by a query.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ArityConflictError, SafetyError
from .facts import FactStore
from .logic import Atom, Constant, Rule, Variable, quote_constant
from .rules import RuleLayer

FactKey = tuple  # (predicate, args tuple)
Derivation = tuple  # (rule id, premise FactKey tuple, in body order)


class DerivedStore:
    """Evaluation result: derived relations plus the derivation hypergraph."""

    def __init__(self, base: FactStore, rules_by_id: dict[int, Rule]):
        self.base = base
        self.rules_by_id = rules_by_id
        self.warnings: list[str] = []
        self.derived: dict[str, set[tuple]] = {}
        self.derivations: dict[FactKey, list[Derivation]] = {}
        # overlay interner for constants that only occur in rules
        self._overlay: dict[str, int] = {}
        self._overlay_values: list[str] = []
        # incrementally maintained indexes over derived relations
        self._dindex: dict[tuple[str, int], dict[int, list[tuple]]] = {}

    # -- symbols --------------------------------------------------------

    def intern(self, value: str) -> int:
        sym = self.base.interner.lookup(value)
        if sym is not None:
            return sym
        sym = self._overlay.get(value)
        if sym is not None:
            return sym
        sym = len(self.base.interner) + len(self._overlay_values)
        self._overlay[value] = sym
        self._overlay_values.append(value)
        return sym

    def resolve(self, sym: int) -> str:
        n = len(self.base.interner)
        return (self.base.interner.resolve(sym) if sym < n
                else self._overlay_values[sym - n])

    def resolve_args(self, args: tuple) -> tuple[str, ...]:
        return tuple(self.resolve(s) for s in args)

    def fact_key(self, predicate: str, values: tuple[str, ...]) -> FactKey | None:
        syms = []
        for v in values:
            sym = self.base.interner.lookup(v)
            if sym is None:
                sym = self._overlay.get(v)
            if sym is None:
                return None
            syms.append(sym)
        key = (predicate, tuple(syms))
        return key if self.contains(key) else None

    # -- facts ----------------------------------------------------------

    def contains(self, key: FactKey) -> bool:
        predicate, args = key
        if args in self.derived.get(predicate, ()):
            return True
        return len(args) == 2 and self.base.has_fact(predicate, args)

    def is_source(self, key: FactKey) -> bool:
        predicate, args = key
        return len(args) == 2 and self.base.has_fact(predicate, args)

    def source_labels(self, key: FactKey) -> tuple[str, ...]:
        predicate, args = key
        return self.base.sources_of(predicate, args)

    def relation_size(self, predicate: str) -> int:
        return (len(self.base.tables.get(predicate, ())) +
                len(self.derived.get(predicate, ())))

    def rows(self, predicate: str):
        base_rows = self.base.tables.get(predicate)
        if base_rows:
            yield from base_rows
        derived_rows = self.derived.get(predicate)
        if derived_rows:
            yield from derived_rows

    def lookup(self, predicate: str, position: int, sym: int) -> list[tuple]:
        out: list[tuple] = []
        if predicate in self.base.tables:
            out.extend(self.base.index(predicate, position).get(sym, ()))
        didx = self._dindex.get((predicate, position))
        if didx is None:
            didx = {}
            for row in self.derived.get(predicate, ()):
                didx.setdefault(row[position], []).append(row)
            self._dindex[(predicate, position)] = didx
        hit = didx.get(sym)
        if hit:
            out.extend(hit)
        return out

    def fact_text(self, key: FactKey) -> str:
        predicate, args = key
        rendered = ",".join(quote_constant(v) for v in self.resolve_args(args))
        return f"{predicate}({rendered})"

    def pruned(self, head_predicate: str) -> "DerivedStore":
        """A store restricted to the facts backward-reachable from one
        relation, with every derivation of those facts kept.

        Proof extraction for that relation's tuples gives identical
        results, while dropping the bulk of the derived tables; this is
        what a result cache should hold on to.
        """
        keep: set[FactKey] = set()
        stack: list[FactKey] = [(head_predicate, args)
                                for args in self.derived.get(head_predicate, ())]
        while stack:
            key = stack.pop()
            if key in keep:
                continue
            keep.add(key)
            for _, premises in self.derivations.get(key, ()):
                for premise in premises:
                    if premise not in keep:
                        stack.append(premise)
        slim = DerivedStore(self.base, self.rules_by_id)
        slim.warnings = list(self.warnings)
        slim._overlay = self._overlay
        slim._overlay_values = self._overlay_values
        for key in keep:
            predicate, args = key
            rows = self.derived.get(predicate)
            if rows is not None and args in rows:
                slim.derived.setdefault(predicate, set()).add(args)
                slim.derivations[key] = self.derivations[key]
        return slim

    def all_derived_keys(self) -> list[FactKey]:
        return [(p, args) for p, rows in self.derived.items() for args in rows]

    # -- mutation during evaluation --------------------------------------

    def _add(self, predicate: str, args: tuple, rule_id: int,
             premises: tuple[FactKey, ...]) -> bool:
        """Record one discovered instantiation.  Returns True when the
        head fact itself is new.  Loaded facts never acquire derivations:
        they are their own evidence."""
        if len(args) == 2 and self.base.has_fact(predicate, args):
            return False
        key = (predicate, args)
        rows = self.derived.get(predicate)
        if rows is None or args not in rows:
            if rows is None:
                rows = set()
                self.derived[predicate] = rows
            rows.add(args)
            for position in range(len(args)):
                didx = self._dindex.get((predicate, position))
                if didx is not None:
                    didx.setdefault(args[position], []).append(args)
            self.derivations[key] = [(rule_id, premises)]
            return True
        # known fact: semi-naive rounds rediscover derivations, so dedup
        # against its (typically very short) derivation list
        recorded = self.derivations[key]
        entry = (rule_id, premises)
        if entry not in recorded:
            recorded.append(entry)
        return False


# ---------------------------------------------------------------------------
# Rule compilation

_CONST = 0
_VAR = 1


@dataclass(slots=True)
class _CompiledRule:
    rule_id: int
    head_pred: str
    head_pattern: tuple          # ((_CONST, sym) | (_VAR, name), ...)
    body: tuple                  # ((pred, pattern), ...) in original order
    body_vars: tuple             # per body atom: frozenset of variable names
    # single-atom copy rules get a direct row-to-row path:
    single_checks: tuple | None = None   # ((position, sym), ...)
    single_equal: tuple | None = None    # ((position, position), ...)
    single_head: tuple | None = None     # ((_VAR, position) | (_CONST, sym), ...)


def _compile_rule(rule_id: int, rule: Rule, ds: DerivedStore) -> _CompiledRule:
    def pattern(atom: Atom) -> tuple:
        out = []
        for term in atom.args:
            if isinstance(term, Variable):
                out.append((_VAR, term.name))
            else:
                out.append((_CONST, ds.intern(term.value)))
        return tuple(out)

    compiled = _CompiledRule(
        rule_id=rule_id,
        head_pred=rule.head.predicate,
        head_pattern=pattern(rule.head),
        body=tuple((a.predicate, pattern(a)) for a in rule.body),
        body_vars=tuple(frozenset(a.variables()) for a in rule.body),
    )
    if len(compiled.body) == 1:
        _, pat = compiled.body[0]
        checks = []
        first_position: dict[str, int] = {}
        equal = []
        for position, (kind, val) in enumerate(pat):
            if kind == _CONST:
                checks.append((position, val))
            elif val in first_position:
                equal.append((first_position[val], position))
            else:
                first_position[val] = position
        compiled.single_checks = tuple(checks)
        compiled.single_equal = tuple(equal)
        compiled.single_head = tuple(
            (kind, val if kind == _CONST else first_position[val])
            for kind, val in compiled.head_pattern)
    return compiled


def _join_order(crule: _CompiledRule, sizes: list[int]) -> list[int]:
    """Most bound arguments first; ties by smaller relation, then body order."""
    remaining = list(range(len(crule.body)))
    bound: set[str] = set()
    order: list[int] = []
    while remaining:
        best_key, best_i = None, -1
        for i in remaining:
            _, pat = crule.body[i]
            bound_args = sum(1 for kind, v in pat
                             if kind == _CONST or v in bound)
            key = (-bound_args, sizes[i], i)
            if best_key is None or key < best_key:
                best_key, best_i = key, i
        order.append(best_i)
        remaining.remove(best_i)
        bound |= crule.body_vars[best_i]
    return order


# ---------------------------------------------------------------------------
# Evaluation


def _validate(rules: list[tuple[int, Rule]], store: FactStore) -> None:
    arities: dict[str, int] = {p: 2 for p in store.tables}
    for _, rule in rules:
        unbound = rule.unbound_head_variables()
        if unbound:
            raise SafetyError(unbound[0])
        for atom in (rule.head, *rule.body):
            seen = arities.get(atom.predicate)
            if seen is None:
                arities[atom.predicate] = atom.arity
            elif seen != atom.arity:
                raise ArityConflictError(atom.predicate, (seen, atom.arity))


def _match(pattern: tuple, row: tuple, env: dict) -> dict | None:
    # reject on constants and bound variables before paying for a copy
    binds = None
    for (kind, val), sym in zip(pattern, row):
        if kind == _CONST:
            if sym != val:
                return None
        else:
            cur = env.get(val)
            if cur is not None:
                if cur != sym:
                    return None
            elif binds is None:
                binds = [(val, sym)]
            else:
                for name, bound_sym in binds:
                    if name == val:
                        if bound_sym != sym:
                            return None
                        break
                else:
                    binds.append((val, sym))
    if binds is None:
        return env
    out = dict(env)
    out.update(binds)
    return out


def _apply_single(crule: _CompiledRule, ds: DerivedStore, rows,
                  added: dict[str, list[tuple]]) -> None:
    """Row-to-row path for one-atom rules, the bulk of a typical layer.

    This is the engine's hottest loop (it copies whole source tables),
    so the bookkeeping of DerivedStore._add is inlined with the
    per-predicate lookups hoisted out of the loop.
    """
    pred = crule.body[0][0]
    checks = crule.single_checks
    equal = crule.single_equal
    head_map = crule.single_head
    head_pred = crule.head_pred
    rule_id = crule.rule_id
    identity = all(kind == _VAR and val == pos
                   for pos, (kind, val) in enumerate(head_map))
    head_arity = len(head_map)

    derived = ds.derived.get(head_pred)
    derivations = ds.derivations
    base_sources = ds.base._sources
    check_base = head_arity == 2
    indexes = [ds._dindex.get((head_pred, position))
               for position in range(head_arity)]
    maintain_index = any(idx is not None for idx in indexes)
    new_rows = None

    for row in rows:
        ok = True
        for position, sym in checks:
            if row[position] != sym:
                ok = False
                break
        if ok:
            for left, right in equal:
                if row[left] != row[right]:
                    ok = False
                    break
        if not ok:
            continue
        if identity and len(row) == head_arity:
            args = row
        else:
            args = tuple([row[val] if kind == _VAR else val
                          for kind, val in head_map])
        key = (head_pred, args)
        if check_base and key in base_sources:
            continue
        if derived is not None and args in derived:
            recorded = derivations[key]
            entry = (rule_id, ((pred, row),))
            if entry not in recorded:
                recorded.append(entry)
            continue
        if derived is None:
            derived = ds.derived.setdefault(head_pred, set())
        derived.add(args)
        derivations[key] = [(rule_id, ((pred, row),))]
        if maintain_index:
            for position, idx in enumerate(indexes):
                if idx is not None:
                    idx.setdefault(args[position], []).append(args)
        if new_rows is None:
            new_rows = added.setdefault(head_pred, [])
        new_rows.append(args)


def _apply_rule(crule: _CompiledRule, ds: DerivedStore,
                delta: dict[str, list[tuple]] | None, delta_idx: int | None,
                added: dict[str, list[tuple]]) -> None:
    body = crule.body
    if not body:
        # fact rule: heads are ground by safety
        args = tuple(sym for _, sym in crule.head_pattern)
        if ds._add(crule.head_pred, args, crule.rule_id, ()):
            added.setdefault(crule.head_pred, []).append(args)
        return

    if len(body) == 1:
        if delta_idx is not None:
            rows = delta.get(body[0][0], ())
        else:
            rows = ds.rows(body[0][0])
            if crule.head_pred == body[0][0]:
                rows = list(rows)  # adds would mutate the set being read
        _apply_single(crule, ds, rows, added)
        return

    sizes = []
    for i, (pred, _) in enumerate(body):
        if delta_idx is not None and i == delta_idx:
            sizes.append(len(delta.get(pred, ())))
        else:
            sizes.append(ds.relation_size(pred))
    order = _join_order(crule, sizes)

    envs: list[dict] = [{}]
    bound_vars: set[str] = set()
    for i in order:
        pred, pat = body[i]
        use_delta = delta_idx is not None and i == delta_idx
        next_envs: list[dict] = []
        if use_delta:
            rows = delta.get(pred, ())
            # index the delta on a bound position when scanning it per
            # environment would clearly cost more than building one
            indexable = [pos for pos, (kind, val) in enumerate(pat)
                         if kind == _CONST or val in bound_vars]
            if indexable and len(envs) * len(rows) > 4096 + len(rows):
                position = indexable[0]
                by_sym: dict[int, list[tuple]] = {}
                for row in rows:
                    by_sym.setdefault(row[position], []).append(row)
                kind, val = pat[position]
                for env in envs:
                    sym = val if kind == _CONST else env[val]
                    for row in by_sym.get(sym, ()):
                        ext = _match(pat, row, env)
                        if ext is not None:
                            next_envs.append(ext)
            else:
                for env in envs:
                    for row in rows:
                        ext = _match(pat, row, env)
                        if ext is not None:
                            next_envs.append(ext)
        else:
            for env in envs:
                # choose the narrowest access path available
                bound_pos = -1
                bound_sym = 0
                fully_bound = True
                for pos, (kind, val) in enumerate(pat):
                    sym = val if kind == _CONST else env.get(val)
                    if sym is None:
                        fully_bound = False
                    elif bound_pos < 0:
                        bound_pos, bound_sym = pos, sym
                if fully_bound and bound_pos >= 0:
                    row = tuple(val if kind == _CONST else env[val]
                                for kind, val in pat)
                    if ds.contains((pred, row)):
                        next_envs.append(env)
                    continue
                rows = (ds.lookup(pred, bound_pos, bound_sym)
                        if bound_pos >= 0 else ds.rows(pred))
                for row in rows:
                    ext = _match(pat, row, env)
                    if ext is not None:
                        next_envs.append(ext)
        envs = next_envs
        if not envs:
            return
        bound_vars |= crule.body_vars[i]

    head_pat = crule.head_pattern
    for env in envs:
        premises = tuple(
            (pred, tuple(val if kind == _CONST else env[val]
                         for kind, val in pat))
            for pred, pat in body)
        args = tuple(val if kind == _CONST else env[val]
                     for kind, val in head_pat)
        if ds._add(crule.head_pred, args, crule.rule_id, premises):
            added.setdefault(crule.head_pred, []).append(args)


def evaluate(layer: RuleLayer, store: FactStore,
             query: Rule | None = None) -> DerivedStore:
    """Compute the least fixpoint of the layer (plus an optional query
    rule) over the store, recording every derivation discovered."""
    rules = list(zip(layer.rule_ids, layer.rules))
    if query is not None:
        if query.head.predicate in layer.head_predicates():
            raise ValueError(
                f"query head {query.head.predicate!r} already defined in the layer")
        next_id = max(layer.rule_ids, default=-1) + 1
        rules.append((next_id, query))
    _validate(rules, store)

    ds = DerivedStore(store, {rid: r for rid, r in rules})
    heads = {r.head.predicate for _, r in rules}
    missing = sorted({a.predicate for _, r in rules for a in r.body}
                     - heads - set(store.tables))
    for pred in missing:
        ds.warnings.append(f"no facts or rules for predicate {pred!r}")

    compiled = [_compile_rule(rid, r, ds) for rid, r in rules]

    # first round: every rule against the full store
    added: dict[str, list[tuple]] = {}
    for crule in compiled:
        _apply_rule(crule, ds, None, None, added)
    delta = added

    # later rounds: only joins touching the previous round's facts
    while delta:
        added = {}
        for crule in compiled:
            for i, (pred, _) in enumerate(crule.body):
                if pred in delta:
                    _apply_rule(crule, ds, delta, i, added)
        delta = added
    return ds


def answers(derived: DerivedStore, head_predicate: str) -> list[tuple[str, ...]]:
    """All tuples of the head relation as strings, lexicographically sorted."""
    out = [derived.resolve_args(args) for args in derived.rows(head_predicate)]
    out.sort()
    return out
