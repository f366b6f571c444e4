"""File-backed HTTP facade for scenario CRUD and what-if computation.

Endpoints:
    GET    /healthz
    POST   /scenarios                  create; 201 or 422 with violations
    GET    /scenarios/{id}             read current revision
    PUT    /scenarios/{id}             replace; requires X-Revision header
    DELETE /scenarios/{id}
    POST   /scenarios/{id}/compute     what-if computation

Persistence is a directory of per-revision scenario files plus an index;
revisions only ever grow, so any (id, revision, params-hash) triple always
names the same numbers. Mutations serialize through one lock; computes are
stateless reads.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
import uuid
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

import numpy as np

from . import allocation as alloc
from .domain import (
    InfeasibleRiskError,
    InformationSet,
    NoRealEquilibriumError,
    ShadowCapError,
    ViewSet,
)
from .pipeline import compute_equilibrium_core
from .reference import ReferenceModel, sigma_gamma
from .scenario import (
    ScenarioFile,
    ScenarioFormatError,
    parse_scenario,
    serialize_scenario,
)
from .views import (
    PosteriorDistribution,
    posterior,
    quantify_qualitative_views,
    resolve_omega,
    view_fit,
)

REVISION_HEADER = "X-Revision"


class StoreError(ShadowCapError):
    pass


class NotFoundError(StoreError):
    pass


class RevisionConflictError(StoreError):
    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"revision mismatch: store has {actual}, request sent {expected}")


@dataclass(frozen=True)
class StoredScenario:
    id: str
    scenario: ScenarioFile
    created_at: str
    updated_at: str
    revision: int


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


class ScenarioStore:
    """One file per (id, revision); an index maps ids to current revisions."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._index_path = self.root / "index.json"
        if not self._index_path.exists():
            self._write_index({})

    def _write_index(self, index: dict):
        tmp = self._index_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
        tmp.replace(self._index_path)

    def _read_index(self) -> dict:
        return json.loads(self._index_path.read_text())

    def _revision_path(self, scenario_id: str, revision: int) -> Path:
        return self.root / f"{scenario_id}@{revision}.json"

    def create(self, scenario: ScenarioFile) -> StoredScenario:
        scenario_id = uuid.uuid4().hex[:12]
        now = _now()
        record = {
            "id": scenario_id,
            "created_at": now,
            "updated_at": now,
            "revision": 1,
            "scenario": json.loads(serialize_scenario(scenario)),
        }
        with self._lock:
            self._revision_path(scenario_id, 1).write_text(
                json.dumps(record, indent=2, sort_keys=True) + "\n"
            )
            index = self._read_index()
            index[scenario_id] = {"revision": 1, "created_at": now}
            self._write_index(index)
        return StoredScenario(scenario_id, scenario, now, now, 1)

    def get(self, scenario_id: str) -> StoredScenario:
        index = self._read_index()
        if scenario_id not in index:
            raise NotFoundError(f"unknown scenario {scenario_id}")
        revision = index[scenario_id]["revision"]
        record = json.loads(self._revision_path(scenario_id, revision).read_text())
        scenario = parse_scenario(json.dumps(record["scenario"]))
        return StoredScenario(
            scenario_id, scenario, record["created_at"], record["updated_at"], revision
        )

    def put(
        self, scenario_id: str, scenario: ScenarioFile, expected_revision: int
    ) -> StoredScenario:
        with self._lock:
            index = self._read_index()
            if scenario_id not in index:
                raise NotFoundError(f"unknown scenario {scenario_id}")
            current = index[scenario_id]["revision"]
            if current != expected_revision:
                raise RevisionConflictError(expected_revision, current)
            revision = current + 1
            now = _now()
            record = {
                "id": scenario_id,
                "created_at": index[scenario_id]["created_at"],
                "updated_at": now,
                "revision": revision,
                "scenario": json.loads(serialize_scenario(scenario)),
            }
            self._revision_path(scenario_id, revision).write_text(
                json.dumps(record, indent=2, sort_keys=True) + "\n"
            )
            index[scenario_id]["revision"] = revision
            self._write_index(index)
        return StoredScenario(
            scenario_id, scenario, record["created_at"], now, revision
        )

    def delete(self, scenario_id: str):
        with self._lock:
            index = self._read_index()
            if scenario_id not in index:
                raise NotFoundError(f"unknown scenario {scenario_id}")
            revision = index[scenario_id]["revision"]
            del index[scenario_id]
            self._write_index(index)
            for rev in range(1, revision + 1):
                path = self._revision_path(scenario_id, rev)
                if path.exists():
                    path.unlink()


class ComputeParamsError(ShadowCapError):
    pass


def params_hash(params: dict) -> str:
    canonical = json.dumps(params, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def compute(stored: StoredScenario, params: dict) -> dict:
    """Stateless what-if evaluation against one scenario revision.

    Returns the prior, posterior, allocation, no-views baseline and deltas.
    Identical (revision, params) pairs always produce identical bodies.
    """
    allowed = {
        "tau", "gamma", "c", "q_overrides", "P_overrides", "stances",
        "objective", "sigma_cap", "info_set",
    }
    unknown = set(params) - allowed
    if unknown:
        raise ComputeParamsError(f"unknown parameter {sorted(unknown)[0]!r}")

    sf = stored.scenario
    scenario = sf.market
    n = scenario.n

    gamma = params.get("gamma", 1)
    if gamma not in (0, 1):
        raise ComputeParamsError("gamma must be 0 or 1")
    tau = float(params.get("tau", sf.shadow.tau))
    if tau <= 0:
        raise ComputeParamsError("tau must be positive")
    objective = params.get("objective", alloc.OBJECTIVE_UNCONSTRAINED)
    if objective not in alloc.OBJECTIVES:
        raise ComputeParamsError(f"unknown objective {objective!r}")
    sigma_cap = params.get("sigma_cap")

    core = compute_equilibrium_core(scenario, sf.shadow)
    pi = core.pi

    views = _resolve_views(sf, params, pi)
    info_set = None
    if params.get("info_set"):
        raw = params["info_set"]
        if not isinstance(raw, list) or any(not isinstance(i, int) for i in raw):
            raise ComputeParamsError("info_set must be a list of 1-based indices")
        if any(i < 1 or i > n for i in raw):
            raise ComputeParamsError("info_set index out of range")
        info_set = InformationSet(investor_id="api", known_assets=tuple(i - 1 for i in raw))

    model_cov = sigma_gamma(gamma, tau, scenario.sigma, sf.shadow.cross_cov, sf.shadow.cost_cov)
    prior_dist = PosteriorDistribution(mean=pi, covariance=tau * model_cov)

    if views is not None:
        prior = ReferenceModel(gamma=gamma, mean=pi, covariance=tau * model_cov)
        post = posterior(prior, views, market_sigma=scenario.sigma)
        fit = view_fit(post, views)
        omega_diag = np.diag(resolve_omega(views, scenario.sigma)).tolist()
        q_list = views.q.tolist()
    else:
        post = prior_dist
        fit = 0.0
        omega_diag = []
        q_list = []

    delta = scenario.delta
    allocation_block = _allocate(post, objective, delta, info_set, sigma_cap)
    baseline_block = _allocate(prior_dist, objective, delta, info_set, sigma_cap)

    return {
        "scenario_id": stored.id,
        "revision": stored.revision,
        "params_hash": params_hash(params),
        "asset_labels": list(scenario.asset_labels),
        "market": {
            "delta": delta,
            "lambda_m": core.lambda_m,
            "delta_lambda": core.delta_lambda,
            "w_capm": core.w_capm.tolist(),
            "w_incomplete": core.w_incomplete.tolist(),
        },
        "prior": {
            "pi": pi.tolist(),
            "sigma_gamma_diag": np.diag(model_cov).tolist(),
        },
        "posterior": {
            "mean": post.mean.tolist(),
            "sigma_diag": np.diag(post.covariance).tolist(),
        },
        "views": {"q": q_list, "omega_diag": omega_diag, "view_fit": fit},
        "allocation": allocation_block,
        "baseline": baseline_block,
        "deltas": {
            "mean": (post.mean - pi).tolist(),
            "weights": (
                np.asarray(allocation_block["weights"])
                - np.asarray(baseline_block["weights"])
            ).tolist(),
        },
    }


def _resolve_views(sf: ScenarioFile, params: dict, pi: np.ndarray) -> Optional[ViewSet]:
    views = sf.views
    q_overrides = params.get("q_overrides")
    p_overrides = params.get("P_overrides")
    stances = params.get("stances")
    c = params.get("c")
    if views is None:
        if q_overrides or p_overrides or stances or c is not None:
            raise ComputeParamsError("scenario has no views to override")
        return None
    P = views.P
    q = views.q
    kinds = views.kinds
    if p_overrides is not None:
        P = np.asarray(p_overrides, dtype=float)
        if P.shape != views.P.shape:
            raise ComputeParamsError(
                f"P_overrides must be {views.P.shape[0]}x{views.P.shape[1]}"
            )
    if q_overrides is not None:
        q = np.asarray(q_overrides, dtype=float)
        if q.shape != views.q.shape:
            raise ComputeParamsError(f"q_overrides must have length {views.v}")
    if stances is not None:
        # qualitative rows: the server quantifies q_k from pi and the view
        # variance; null entries keep their numeric pick value
        if not isinstance(stances, list) or len(stances) != views.v:
            raise ComputeParamsError(f"stances must have one entry per view ({views.v})")
        picked = [i for i, s in enumerate(stances) if s is not None]
        if picked:
            try:
                quantified = quantify_qualitative_views(
                    P[picked], pi, sf.market.sigma, [stances[i] for i in picked]
                )
            except ValueError as exc:
                raise ComputeParamsError(str(exc)) from exc
            q = np.array(q, dtype=float)
            q[picked] = quantified
    confidence = views.confidence
    omega = views.omega
    if c is not None:
        if not 0.0 < c < 1.0:
            raise ComputeParamsError("c must be strictly inside (0, 1)")
        confidence, omega = float(c), None
    try:
        return ViewSet(P=P, q=q, kinds=kinds, confidence=confidence, omega=omega)
    except ValueError as exc:
        raise ComputeParamsError(str(exc)) from exc


def _allocate(post, objective, delta, info_set, sigma_cap) -> dict:
    request = alloc.AllocationRequest(
        posterior=post,
        objective=objective,
        delta=delta,
        info_set=info_set,
        sigma_cap=sigma_cap,
    )
    try:
        outcome = alloc.run_allocation(request)
    except InfeasibleRiskError as exc:
        return {
            "feasible": False,
            "weights": [0.0] * (info_set.size if info_set else post.n),
            "assets": list((info_set.known_assets if info_set else range(post.n))),
            "min_variance_risk": exc.min_variance_risk,
            "return": None,
            "risk": None,
        }
    restricted = (
        alloc.restrict_to_information_set(post, info_set) if info_set is not None else post
    )
    ret = float(outcome.weights @ restricted.mean)
    risk = float(np.sqrt(outcome.weights @ restricted.covariance @ outcome.weights))
    block = {
        "feasible": True,
        "weights": outcome.weights.tolist(),
        "assets": [i + 1 for i in outcome.assets],
        "return": ret,
        "risk": risk,
    }
    if outcome.a is not None:
        block["two_fund"] = {"a": outcome.a, "b": outcome.b}
    return block


# ---------------------------------------------------------------------------
# HTTP layer


def _error_body(code: str, message: str, **extra) -> dict:
    body = {"code": code, "message": message}
    body.update(extra)
    return body


class _Handler(BaseHTTPRequestHandler):
    store: ScenarioStore = None
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, status: int, body: Optional[dict]):
        payload = b"" if body is None else json.dumps(body).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        if payload:
            self.wfile.write(payload)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length", 0))
        return self.rfile.read(length) if length else b""

    def _dispatch(self, method: str):
        try:
            self._route(method)
        except NotFoundError as exc:
            self._send(404, _error_body("not_found", str(exc)))
        except RevisionConflictError as exc:
            self._send(
                409,
                _error_body("revision_conflict", str(exc), current_revision=exc.actual),
            )
        except ScenarioFormatError as exc:
            self._send(
                422,
                _error_body(
                    "validation_failed", str(exc), violations=[str(i) for i in exc.issues]
                ),
            )
        except (ComputeParamsError, NoRealEquilibriumError, ShadowCapError) as exc:
            self._send(422, _error_body("invalid_params", str(exc)))
        except Exception as exc:  # noqa: BLE001 - last-resort 500
            self._send(500, _error_body("internal_error", str(exc)))

    def _route(self, method: str):
        parts = [p for p in self.path.split("?")[0].split("/") if p]
        if method == "GET" and parts == ["healthz"]:
            self._send(200, {"status": "ok"})
            return
        if parts and parts[0] == "scenarios":
            if method == "POST" and len(parts) == 1:
                self._create()
                return
            if len(parts) == 2:
                if method == "GET":
                    self._get(parts[1])
                    return
                if method == "PUT":
                    self._put(parts[1])
                    return
                if method == "DELETE":
                    self.store.delete(parts[1])
                    self._send(204, None)
                    return
            if method == "POST" and len(parts) == 3 and parts[2] == "compute":
                self._compute(parts[1])
                return
        self._send(404, _error_body("not_found", f"no route for {method} {self.path}"))

    def _create(self):
        scenario = parse_scenario(self._read_body().decode())
        stored = self.store.create(scenario)
        self._send(201, self._meta(stored))

    def _get(self, scenario_id: str):
        stored = self.store.get(scenario_id)
        body = self._meta(stored)
        body["scenario"] = json.loads(serialize_scenario(stored.scenario))
        self._send(200, body)

    def _put(self, scenario_id: str):
        revision = self.headers.get(REVISION_HEADER)
        if revision is None:
            self._send(
                428, _error_body("missing_revision", f"{REVISION_HEADER} header required")
            )
            return
        scenario = parse_scenario(self._read_body().decode())
        stored = self.store.put(scenario_id, scenario, int(revision))
        self._send(200, self._meta(stored))

    def _compute(self, scenario_id: str):
        stored = self.store.get(scenario_id)
        revision = self.headers.get(REVISION_HEADER)
        if revision is not None and int(revision) != stored.revision:
            raise RevisionConflictError(int(revision), stored.revision)
        body = self._read_body()
        params = json.loads(body.decode()) if body else {}
        if not isinstance(params, dict):
            raise ComputeParamsError("compute body must be a JSON object")
        self._send(200, compute(stored, params))

    @staticmethod
    def _meta(stored: StoredScenario) -> dict:
        return {
            "id": stored.id,
            "revision": stored.revision,
            "created_at": stored.created_at,
            "updated_at": stored.updated_at,
        }

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PUT(self):
        self._dispatch("PUT")

    def do_DELETE(self):
        self._dispatch("DELETE")


def make_server(store_dir, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; port 0 picks a free port."""
    store = ScenarioStore(store_dir)
    handler = type("BoundHandler", (_Handler,), {"store": store})
    return ThreadingHTTPServer((host, port), handler)


def serve(store_dir, host: str = "127.0.0.1", port: int = 8723):
    server = make_server(store_dir, host, port)
    print(f"shadowcap service on http://{host}:{server.server_address[1]} "
          f"(store: {store_dir})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
