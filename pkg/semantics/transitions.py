"""
One-step transitions of the finite fragment.

Negative premises only ever ask whether a component has a tau-step, and the
tau-steps of a term depend only on the tau-steps of its subterms. So each
node's tau-steps and visible steps are computed once its operands are done,
bottom-up over an explicit stack.
"""

from typing import Dict, Tuple

from calculus.terms import TAU, Action, Conj, Disj, ExtChoice, Par, Prefix, Term, term_key

Step = Tuple[Action, Term]

_taus: Dict[Term, Tuple[Term, ...]] = {}
_visible: Dict[Term, Tuple[Step, ...]] = {}
_steps: Dict[Term, Tuple[Step, ...]] = {}


def _ordered(steps) -> Tuple[Step, ...]:
    return tuple(sorted(set(steps), key=lambda s: (s[0].sort_key(), term_key(s[1]))))


def _operands(t: Term) -> Tuple[Term, ...]:
    # prefixes and disjunctions step without looking inside
    return t.children() if isinstance(t, (ExtChoice, Conj, Par)) else ()


def _settle(t: Term):
    stack = [t]
    while stack:
        node = stack[-1]
        if node in _visible:
            stack.pop()
            continue
        pending = [c for c in _operands(node) if c not in _visible]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        _taus[node] = _tau_rule(node)
        _visible[node] = _visible_rule(node)


def tau_steps(t: Term) -> Tuple[Term, ...]:
    """Targets of the tau-transitions of t."""
    if t not in _taus:
        _settle(t)
    return _taus[t]


def visible_steps(t: Term) -> Tuple[Step, ...]:
    if t not in _visible:
        _settle(t)
    return _visible[t]


def _rebuilder(t: Term):
    if isinstance(t, Par):
        return lambda left, right: Par(left, right, t.sync)
    return type(t)


def _tau_rule(t: Term) -> Tuple[Term, ...]:
    if isinstance(t, Prefix):
        return (t.body,) if t.action.is_tau else ()
    if isinstance(t, Disj):
        return (t.left, t.right)
    if isinstance(t, (ExtChoice, Conj, Par)):
        rebuild = _rebuilder(t)
        return tuple(rebuild(l2, t.right) for l2 in _taus[t.left]) + \
            tuple(rebuild(t.left, r2) for r2 in _taus[t.right])
    return ()


def is_stable(t: Term) -> bool:
    return not tau_steps(t)


def _by_action(t: Term, action: Action) -> Tuple[Term, ...]:
    return tuple(target for label, target in _visible[t] if label == action)


def _visible_rule(t: Term) -> Tuple[Step, ...]:
    if isinstance(t, Prefix):
        return ((t.action, t.body),) if t.action.is_visible else ()
    if isinstance(t, ExtChoice):
        out = []
        # external choice is resolved by a visible step of a side whose partner is stable
        if not _taus[t.right]:
            out.extend(_visible[t.left])
        if not _taus[t.left]:
            out.extend(_visible[t.right])
        return _ordered(out)
    if isinstance(t, Conj):
        out = []
        for action, left in _visible[t.left]:
            for right in _by_action(t.right, action):
                out.append((action, Conj(left, right)))
        return _ordered(out)
    if isinstance(t, Par):
        out = []
        for action, left in _visible[t.left]:
            if action in t.sync:
                out.extend((action, Par(left, right, t.sync)) for right in _by_action(t.right, action))
            elif not _taus[t.right]:
                out.append((action, Par(left, t.right, t.sync)))
        for action, right in _visible[t.right]:
            if action not in t.sync and not _taus[t.left]:
                out.append((action, Par(t.left, right, t.sync)))
        return _ordered(out)
    return ()


def step(t: Term) -> Tuple[Step, ...]:
    """All one-step transitions of t, ordered by label and then target."""
    cached = _steps.get(t)
    if cached is None:
        cached = _steps[t] = _ordered([(TAU, target) for target in tau_steps(t)] + list(visible_steps(t)))
    return cached


def clear_caches():
    _taus.clear()
    _visible.clear()
    _steps.clear()
