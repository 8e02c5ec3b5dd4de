"""Disk cache for evaluations, plus the parallel bundle orchestrator.

Cache entries are JSON files keyed by a digest of (instance, coefficient
table, s, test function, cutoff, precision).  Number payloads use gmpy2's
binary serialization (base64-encoded), so cached evaluations round-trip
bit-exactly.  Writes are atomic (write-temp-then-rename).
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import gmpy2

from .afe import AfeKernel, Evaluation
from .instances import build_instance
from .lmodel import TestFunction

__all__ = ["EvalStore", "RunSpec", "ensure_evaluations", "evaluation_key"]


def _enc(x):
    return base64.b64encode(gmpy2.to_binary(x)).decode("ascii")


def _dec(s):
    return gmpy2.from_binary(base64.b64decode(s.encode("ascii")))


def serialize_evaluation(ev):
    return {
        "instance_label": ev.instance_label,
        "s": [str(ev.s[0]), str(ev.s[1])],
        "g": ev.g.serialize(),
        "n_cutoff": ev.n_cutoff,
        "degree": ev.degree,
        "bound_constant": str(ev.bound_constant),
        "known_part": _enc(ev.known_part),
        "deltas": {str(q): _enc(v) for q, v in ev.deltas.items()},
        "tail_bound": _enc(ev.tail_bound),
        "z_normalizer_phase": _enc(ev.z_normalizer_phase),
        "coeffs": [_enc(c) for c in ev.coeffs[1:]],
        "mu_log10": ev.mu_log10[1:],
        "diagnostics": ev.diagnostics,
    }


def deserialize_evaluation(d):
    return Evaluation(
        instance_label=d["instance_label"],
        s=(Fraction(d["s"][0]), Fraction(d["s"][1])),
        g=TestFunction.deserialize(d["g"]),
        n_cutoff=d["n_cutoff"],
        degree=d["degree"],
        bound_constant=Fraction(d["bound_constant"]),
        known_part=_dec(d["known_part"]),
        deltas={int(q): _dec(v) for q, v in d["deltas"].items()},
        tail_bound=_dec(d["tail_bound"]),
        z_normalizer_phase=_dec(d["z_normalizer_phase"]),
        coeffs=[None] + [_dec(c) for c in d["coeffs"]],
        mu_log10=[None] + d["mu_log10"],
        diagnostics=d["diagnostics"],
    )


def evaluation_key(spec, g):
    payload = json.dumps(
        {
            "instance": spec.instance,
            "table_digest": spec.table_digest(),
            "s": [str(spec.s[0]), str(spec.s[1])],
            "g": g.serialize(),
            "n_cutoff": spec.n_cutoff,
            "digits": spec.digits,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:24]


class EvalStore:
    def __init__(self, directory):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)

    def _path(self, key):
        return os.path.join(self.directory, key + ".json")

    def get(self, key):
        path = self._path(key)
        if not os.path.exists(path):
            return None
        with open(path) as fh:
            return deserialize_evaluation(json.load(fh))

    def put(self, key, ev):
        data = json.dumps(serialize_evaluation(ev))
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(data)
            os.replace(tmp, self._path(key))
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)


class RunSpec:
    """Everything needed to (re)build a kernel: picklable, hashable, echoed in reports."""

    def __init__(
        self,
        instance,
        s,
        digits,
        n_cutoff=2000,
        known_mode="table",
        table_path=None,
        cache_dir=None,
        jobs=1,
    ):
        from .afe import parse_s

        self.instance = instance
        self.s = parse_s(s)
        self.digits = int(digits)
        self.n_cutoff = int(n_cutoff)
        self.known_mode = known_mode
        self.table_path = table_path
        self.cache_dir = cache_dir
        self.jobs = int(jobs)
        self._table_digest = None

    def build(self):
        return build_instance(
            self.instance,
            n_cutoff=self.n_cutoff,
            known_mode=self.known_mode,
            table_path=self.table_path,
        )

    def context(self):
        from .numerics import PrecisionContext

        return PrecisionContext(self.digits)

    def table_digest(self):
        if self._table_digest is None:
            inst = self.build()
            blob = json.dumps(
                {"label": inst.label, "table": inst.coeffs.serialize()}, sort_keys=True
            )
            self._table_digest = hashlib.sha256(blob.encode()).hexdigest()[:16]
        return self._table_digest

    def echo(self):
        return {
            "instance": self.instance,
            "s": f"{self.s[0]}+{self.s[1]}i",
            "digits": self.digits,
            "n_cutoff": self.n_cutoff,
            "known_mode": self.known_mode,
            "table_path": self.table_path or "(vendored)",
        }

    def _pick(self):
        return {
            "instance": self.instance,
            "s": (str(self.s[0]), str(self.s[1])),
            "digits": self.digits,
            "n_cutoff": self.n_cutoff,
            "known_mode": self.known_mode,
            "table_path": self.table_path,
            "cache_dir": self.cache_dir,
        }

    @classmethod
    def _unpick(cls, d):
        d = dict(d)
        d["s"] = (Fraction(d["s"][0]), Fraction(d["s"][1]))
        return cls(**d)


def _worker(args):
    spec_d, g_dicts, all_g_dicts = args
    spec = RunSpec._unpick(spec_d)
    store = EvalStore(spec.cache_dir)
    inst = spec.build()
    ctx = spec.context()
    kern = AfeKernel(inst, spec.s, ctx, n_cutoff=spec.n_cutoff)
    # prepare against the full family so every worker picks the same plan
    kern.prepare([TestFunction.deserialize(d) for d in all_g_dicts])
    done = []
    for gd in g_dicts:
        g = TestFunction.deserialize(gd)
        key = evaluation_key(spec, g)
        if store.get(key) is None:
            ev = kern.evaluate(g)
            store.put(key, ev)
        done.append(key)
    return done


def ensure_evaluations(spec, gs, progress=None):
    """Evaluations for every g in gs, from cache or computed (possibly in parallel)."""
    gs = list(gs)
    if not gs:
        return []
    if spec.cache_dir is None:
        inst = spec.build()
        kern = AfeKernel(inst, spec.s, spec.context(), n_cutoff=spec.n_cutoff)
        kern.prepare(gs)
        out = []
        for i, g in enumerate(gs):
            out.append(kern.evaluate(g))
            if progress:
                progress(i + 1, len(gs))
        return out

    store = EvalStore(spec.cache_dir)
    missing = [g for g in gs if store.get(evaluation_key(spec, g)) is None]
    if missing:
        all_gd = [g.serialize() for g in gs]
        jobs = max(1, min(spec.jobs, len(missing)))
        if jobs == 1:
            _worker((spec._pick(), [g.serialize() for g in missing], all_gd))
            if progress:
                progress(len(gs), len(gs))
        else:
            chunks = [[] for _ in range(jobs)]
            for i, g in enumerate(missing):
                chunks[i % jobs].append(g.serialize())
            args = [(spec._pick(), ch, all_gd) for ch in chunks if ch]
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                n_done = 0
                for res in pool.map(_worker, args):
                    n_done += len(res)
                    if progress:
                        progress(n_done, len(missing))
    return [store.get(evaluation_key(spec, g)) for g in gs]
