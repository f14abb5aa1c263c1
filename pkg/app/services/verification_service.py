"""
Servicio de Verificación - Consensus Lyapunov
Chequeos con residuos y tolerancias fijas, instancias aleatorias y suite completa
"""
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import ConfigurationException, SymmetryRequiredException
from app.models import (
    AdditiveLyapunov,
    ConvexPotential,
    LaplacianMatrix,
    PerronVector,
    Trajectory,
    WeightedDigraph,
)
from app.schemas import CheckReport
from app.services import flow_service, graph_service, metric_service, potential_service
from app.services.linalg_utils import inf_norm

logger = logging.getLogger(__name__)

STOCHASTIC_TIMES = (0.01, 0.1, 1.0, 10.0)
BUILTIN_POTENTIALS = ("quadratic", "entropy", "gibbs")


# ==================== INSTANCIAS ALEATORIAS ====================

@dataclass(frozen=True)
class RandomInstance:
    """Grafo aleatorio fuertemente conexo con estados positivos, reproducible por semilla"""
    seed: int
    n: int
    graph: WeightedDigraph
    laplacian: LaplacianMatrix
    perron: PerronVector
    states: Tuple[np.ndarray, ...]


def instance_seed(seed: int, n: int, k: int, symmetric: bool = True) -> int:
    """Semilla entera por instancia derivada de (seed, n, k)"""
    return int(np.random.SeedSequence([seed, n, k, int(symmetric)]).generate_state(1)[0])


def random_instance(seed: int, n: int, symmetric: bool = True, states: int = 5) -> RandomInstance:
    """
    Genera una instancia: grafo de Erdős–Rényi y estados U[0.5, 2]

    Args:
        seed: Semilla de la instancia
        n: Cantidad de nodos
        symmetric: Grafo simétrico (no dirigido)
        states: Cantidad de estados positivos a muestrear
    """
    rng = np.random.default_rng(seed)
    g = graph_service.random_digraph(n, rng, symmetric=symmetric)
    L = graph_service.build_laplacian(g)
    return RandomInstance(
        seed=seed,
        n=n,
        graph=g,
        laplacian=L,
        perron=graph_service.perron_vector(L),
        states=tuple(rng.uniform(0.5, 2.0, n) for _ in range(states)),
    )


def suite_lyapunov(name: str, q: PerronVector, a: float) -> AdditiveLyapunov:
    """
    Lyapunov centrada en el consenso a

    quadratic: β = n, c = 1, ref = a; entropy/gibbs: β = a·n, c = 1/a.
    """
    n = q.q.shape[0]
    if name == "quadratic":
        return AdditiveLyapunov(beta=float(n), c=1.0, q=q, potential=potential_service.builtin_quadratic(a))
    return AdditiveLyapunov(beta=a * n, c=1.0 / a, q=q, potential=potential_service.potential_by_name(name))


def format_report_line(report: CheckReport) -> str:
    """Una línea: name PASS|FAIL residual= tolerance= seed= context="""
    estado = "PASS" if report.passed else "FAIL"
    if report.informational:
        estado += "(info)"
    contexto = json.dumps(report.context, sort_keys=True, default=str, ensure_ascii=False)
    return (
        f"{report.name} {estado} residual={report.residual:.17g} "
        f"tolerance={report.tolerance:.17g} seed={report.seed} context={contexto}"
    )


# ==================== SERVICIO ====================

class VerificationService:
    """
    Chequeos de las identidades del sistema de consenso

    Tolerancias fijas por chequeo; tolerance_scale (0.1 estricto, 10 laxo)
    escala todas las continuas. Los chequeos binarios cuentan violaciones
    contra BINARY_TOL y no se escalan.
    """

    THEOREM2_TOL = 1e-10
    QUADRATIC_METRIC_TOL = 1e-13
    STOCHASTIC_TOL = 1e-12
    SEMIGROUP_TOL = 1e-10
    CONSERVATION_TOL = 1e-8
    GRADIENT_TOL = 1e-6
    METRIC_EQ_TOL = 1e-12
    MARKOV_TOL = 1e-6
    STATIONARY_TOL = 1e-10
    EQUIVALENCE_TOL = 1e-8
    DISSIPATION_FLOOR = 1e-9
    BINARY_TOL = 0.5

    CONSENSUS_MARGIN = 1e-6
    FD_RELATIVE_STEP = 1e-5
    CORRUPTION = 1e-3

    def __init__(self, tolerance_scale: float = 1.0):
        if not tolerance_scale > 0:
            raise ConfigurationException("La escala de tolerancias debe ser positiva", {"scale": tolerance_scale})
        self.tolerance_scale = tolerance_scale

    def _tol(self, base: float) -> float:
        return base * self.tolerance_scale

    @staticmethod
    def _require_samples(trajectory: Trajectory, minimo: int, operacion: str) -> None:
        if len(trajectory) < minimo:
            raise ConfigurationException(
                message=f"'{operacion}' requiere al menos {minimo} muestras (hay {len(trajectory)})",
                details={"operacion": operacion, "muestras": len(trajectory)}
            )

    # ==================== GEOMETRÍA ====================

    def check_theorem2(
        self,
        L: LaplacianMatrix,
        H: ConvexPotential,
        x,
        alpha: float,
        seed: Optional[int] = None,
        metric: Optional[np.ndarray] = None
    ) -> CheckReport:
        """
        Identidad de flujo gradiente -Lx = -G⁻¹(x)∇V(x)

        El residuo suma la asimetría y las sumas por fila de G⁻¹ normalizadas,
        de modo que una métrica corrupta se detecta aunque el gradiente no
        la excite.
        """
        x = np.asarray(x, dtype=float)
        g_inv = metric_service.metric_matrix(L, H, x, alpha).entries if metric is None else np.asarray(metric, dtype=float)
        escala = max(1.0, inf_norm(g_inv))
        identidad = metric_service.gradient_identity_residual(L, H, x, alpha, metric=g_inv)
        filas = float(np.abs(g_inv.sum(axis=1)).max(initial=0.0)) / escala
        simetria = float(np.abs(g_inv - g_inv.T).max(initial=0.0)) / escala
        return CheckReport.from_residual(
            name="theorem2",
            residual=max(identidad, filas, simetria),
            tolerance=self._tol(self.THEOREM2_TOL),
            seed=seed,
            context={
                "n": L.n,
                "potential": H.name,
                "alpha": alpha,
                "identity_residual": identidad,
                "metric_override": metric is not None,
            },
        )

    def check_theorem2_negative_control(
        self,
        L: LaplacianMatrix,
        H: ConvexPotential,
        x,
        alpha: float,
        rng: np.random.Generator,
        seed: Optional[int] = None
    ) -> CheckReport:
        """Corrompe una entrada de G⁻¹ en 1e-3 y exige que check_theorem2 falle"""
        g_inv = metric_service.metric_matrix(L, H, x, alpha).entries.copy()
        i, j, _ = L.edge_arrays()
        elegida = int(rng.integers(i.size))
        g_inv[i[elegida], j[elegida]] += self.CORRUPTION
        corrupto = self.check_theorem2(L, H, x, alpha, seed=seed, metric=g_inv)
        return CheckReport.from_residual(
            name="theorem2_negative_control",
            residual=0.0 if not corrupto.passed else 1.0,
            tolerance=self.BINARY_TOL,
            seed=seed,
            context={
                "n": L.n,
                "potential": H.name,
                "entry": [int(i[elegida]), int(j[elegida])],
                "corrupted_residual": corrupto.residual,
            },
        )

    def check_quadratic_metric(self, L: LaplacianMatrix, x, alpha: float, seed: Optional[int] = None) -> CheckReport:
        """G⁻¹ del potencial cuadrático coincide con α·L"""
        g_inv = metric_service.metric_matrix(L, potential_service.builtin_quadratic(1.0), x, alpha)
        residual = float(np.abs(g_inv.entries - alpha * L.entries).max(initial=0.0))
        return CheckReport.from_residual(
            name="quadratic_metric",
            residual=residual,
            tolerance=self._tol(self.QUADRATIC_METRIC_TOL),
            seed=seed,
            context={"n": L.n, "alpha": alpha},
        )

    def check_metric_equivalence(self, L: LaplacianMatrix, x, alpha: float, seed: Optional[int] = None) -> CheckReport:
        """G⁻¹ de entropía y de Gibbs son idénticas"""
        entropia = metric_service.metric_matrix(L, potential_service.builtin_entropy(), x, alpha)
        gibbs = metric_service.metric_matrix(L, potential_service.builtin_gibbs(), x, alpha)
        residual = float(np.abs(entropia.entries - gibbs.entries).max(initial=0.0))
        return CheckReport.from_residual(
            name="metric_equivalence",
            residual=residual,
            tolerance=self._tol(self.METRIC_EQ_TOL),
            seed=seed,
            context={"n": L.n, "alpha": alpha},
        )

    # ==================== POTENCIALES ====================

    def check_gradient(self, V: AdditiveLyapunov, x, seed: Optional[int] = None) -> CheckReport:
        """
        Gradiente analítico contra diferencias centradas con paso 1e-5·max(1, |x_i|)
        """
        x = np.asarray(x, dtype=float)
        analitico = potential_service.lyapunov_gradient(V, x)
        numerico = np.empty_like(x)
        for i in range(x.shape[0]):
            paso = self.FD_RELATIVE_STEP * max(1.0, abs(x[i]))
            adelante = x.copy()
            atras = x.copy()
            adelante[i] += paso
            atras[i] -= paso
            numerico[i] = (
                potential_service.lyapunov_value(V, adelante) - potential_service.lyapunov_value(V, atras)
            ) / (2.0 * paso)
        residual = inf_norm(numerico - analitico) / max(1.0, inf_norm(analitico))
        return CheckReport.from_residual(
            name="gradient",
            residual=residual,
            tolerance=self._tol(self.GRADIENT_TOL),
            seed=seed,
            context={"n": V.n, "potential": V.potential.name},
        )

    def check_dissipation(
        self,
        L: LaplacianMatrix,
        V: AdditiveLyapunov,
        trajectory: Trajectory,
        seed: Optional[int] = None
    ) -> CheckReport:
        """
        dV/dt por diferencias centradas contra -Ψ_V en muestras interiores

        Residuo normalizado por max(1, ‖L‖∞³·E₀) con E₀ = V(x₀) - V(a·1);
        tolerancia max(10·dt², 1e-9).

        Raises:
            SymmetryRequiredException: Si L no es simétrico
            ConfigurationException: Con menos de 3 muestras
        """
        if not L.symmetric:
            raise SymmetryRequiredException("check_dissipation")
        self._require_samples(trajectory, 3, "check_dissipation")

        t = trajectory.times
        valores = np.array([potential_service.lyapunov_value(V, x) for x in trajectory.states])
        a = trajectory.consensus_level
        energia = valores[0] - potential_service.lyapunov_value(V, np.full(trajectory.n, a))
        escala = max(1.0, L.inf_norm ** 3 * abs(energia))

        peor = 0.0
        interiores = 0
        for k in range(1, len(t) - 1):
            h_prev = t[k] - t[k - 1]
            h_next = t[k + 1] - t[k]
            if abs(h_next - h_prev) > 1e-12 * h_prev:
                continue
            derivada = (valores[k + 1] - valores[k - 1]) / (t[k + 1] - t[k - 1])
            psi = potential_service.group_disagreement(L, V, trajectory.states[k])
            peor = max(peor, abs(derivada + psi))
            interiores += 1
        if interiores == 0:
            raise ConfigurationException("Sin muestras interiores equiespaciadas", {"muestras": len(t)})

        dt = trajectory.dt or float(t[1] - t[0])
        tolerancia = max(10.0 * dt ** 2, self.DISSIPATION_FLOOR) * self.tolerance_scale
        return CheckReport.from_residual(
            name="dissipation",
            residual=peor / escala,
            tolerance=tolerancia,
            seed=seed,
            context={"n": L.n, "potential": V.potential.name, "dt": dt, "interior_samples": interiores},
        )

    def check_monotone(self, V: AdditiveLyapunov, trajectory: Trajectory, seed: Optional[int] = None) -> CheckReport:
        """
        Decrecimiento estricto de V entre muestras consecutivas mientras
        ‖x - a·1‖∞ > 1e-6; el residuo es la cantidad de violaciones
        """
        self._require_samples(trajectory, 2, "check_monotone")
        a = trajectory.consensus_level
        valores = [potential_service.lyapunov_value(V, x) for x in trajectory.states]
        violaciones, comparados, primera = self._count_increases(valores, trajectory, a, strict=True)
        return CheckReport.from_residual(
            name="monotone",
            residual=float(violaciones),
            tolerance=self.BINARY_TOL,
            seed=seed,
            context={
                "n": trajectory.n,
                "potential": V.potential.name,
                "dynamics": trajectory.dynamics,
                "compared_segments": comparados,
                "first_violation": primera,
            },
        )

    def _count_increases(
        self,
        valores: Sequence[float],
        trajectory: Trajectory,
        a: float,
        strict: bool
    ) -> Tuple[int, int, Optional[int]]:
        violaciones = 0
        comparados = 0
        primera: Optional[int] = None
        for k in range(len(valores) - 1):
            if flow_service.distance_to_consensus(trajectory.states[k], a) <= self.CONSENSUS_MARGIN:
                break
            comparados += 1
            falla = valores[k + 1] >= valores[k] if strict else valores[k + 1] > valores[k]
            if falla:
                violaciones += 1
                primera = k if primera is None else primera
        return violaciones, comparados, primera

    def check_theorem1_necessity(
        self,
        L: LaplacianMatrix,
        x0,
        seed: Optional[int] = None,
        t_end: float = 1.0
    ) -> CheckReport:
        """
        Con H(u) = -u² la funcional aditiva crece en algún segmento

        passed ⇔ se encontró un incremento; un estado de consenso se marca
        como entrada degenerada y no pasa.
        """
        x0 = np.asarray(x0, dtype=float)
        q = graph_service.perron_vector(L)
        a = float(q.q @ x0)
        contexto = {"n": L.n, "potential": "concave_counterexample"}
        if flow_service.distance_to_consensus(x0, a) <= self.CONSENSUS_MARGIN:
            contexto["degenerate"] = True
            return CheckReport.from_residual(
                "theorem1_necessity", 1.0, self.BINARY_TOL, seed=seed, context=contexto
            )

        V = AdditiveLyapunov(beta=1.0, c=1.0, q=q, potential=potential_service.concave_counterexample())
        dt = min(1e-2, 1.0 / (2.0 * L.max_diagonal))
        trayectoria = flow_service.integrate_linear(L, x0, t_end, dt)
        valores = [potential_service.lyapunov_value(V, x) for x in trayectoria.states]
        incrementos = sum(1 for k in range(len(valores) - 1) if valores[k + 1] > valores[k])
        contexto.update({"degenerate": False, "increasing_segments": incrementos, "samples": len(valores)})
        return CheckReport.from_residual(
            name="theorem1_necessity",
            residual=0.0 if incrementos > 0 else 1.0,
            tolerance=self.BINARY_TOL,
            seed=seed,
            context=contexto,
        )

    def check_disagreement_decay(
        self,
        L: LaplacianMatrix,
        V: AdditiveLyapunov,
        trajectory: Trajectory,
        seed: Optional[int] = None
    ) -> CheckReport:
        """Ψ_V no creciente a lo largo de la trayectoria (informativo)"""
        self._require_samples(trajectory, 2, "check_disagreement_decay")
        a = trajectory.consensus_level
        valores = [potential_service.group_disagreement(L, V, x) for x in trajectory.states]
        violaciones, comparados, primera = self._count_increases(valores, trajectory, a, strict=False)
        return CheckReport.from_residual(
            name="disagreement_decay",
            residual=float(violaciones),
            tolerance=self.BINARY_TOL,
            seed=seed,
            context={
                "n": L.n,
                "potential": V.potential.name,
                "compared_segments": comparados,
                "first_violation": primera,
            },
            informational=True,
        )

    # ==================== DINÁMICA ====================

    def check_stochastic_flow(
        self,
        L: LaplacianMatrix,
        t_grid: Iterable[float] = STOCHASTIC_TIMES,
        seed: Optional[int] = None
    ) -> CheckReport:
        """Filas de e^{-Lt} suman 1 y entradas ≥ -tol para cada t de la grilla"""
        peor = 0.0
        tiempos = []
        for t in t_grid:
            p = flow_service.flow_map(L, t).matrix
            filas = float(np.abs(p.sum(axis=1) - 1.0).max(initial=0.0))
            negatividad = max(0.0, -float(p.min(initial=0.0)))
            peor = max(peor, filas, negatividad)
            tiempos.append(t)
        return CheckReport.from_residual(
            name="stochastic_flow",
            residual=peor,
            tolerance=self._tol(self.STOCHASTIC_TOL),
            seed=seed,
            context={"n": L.n, "t_grid": tiempos},
        )

    def check_semigroup(
        self,
        L: LaplacianMatrix,
        s: float = 0.3,
        t: float = 0.7,
        seed: Optional[int] = None
    ) -> CheckReport:
        """‖P^(s)P^(t) - P^(s+t)‖∞"""
        producto = flow_service.flow_map(L, s).matrix @ flow_service.flow_map(L, t).matrix
        residual = inf_norm(producto - flow_service.flow_map(L, s + t).matrix)
        return CheckReport.from_residual(
            name="semigroup",
            residual=residual,
            tolerance=self._tol(self.SEMIGROUP_TOL),
            seed=seed,
            context={"n": L.n, "s": s, "t": t},
        )

    def check_conservation(
        self,
        trajectory: Trajectory,
        q: Optional[PerronVector] = None,
        seed: Optional[int] = None
    ) -> CheckReport:
        """
        max_k |wᵀx(t_k) - conserved| / max(1, |conserved|)

        w es q si se pasa, o los pesos propios de la trayectoria.
        """
        self._require_samples(trajectory, 2, "check_conservation")
        pesos = q.q if q is not None else trajectory.weights
        conservado = float(pesos @ trajectory.states[0])
        desvio = float(np.abs(trajectory.states @ pesos - conservado).max())
        return CheckReport.from_residual(
            name="conservation",
            residual=desvio / max(1.0, abs(conservado)),
            tolerance=self._tol(self.CONSERVATION_TOL),
            seed=seed,
            context={"n": trajectory.n, "dynamics": trajectory.dynamics, "samples": len(trajectory)},
        )

    def check_markov_dual(
        self,
        L: LaplacianMatrix,
        p0,
        t_end: float,
        dt: float,
        seed: Optional[int] = None
    ) -> CheckReport:
        """‖p(t_end) - q‖₁ para ṗᵀ = -pᵀL"""
        q = graph_service.perron_vector(L)
        trayectoria = flow_service.markov_dual(L, p0, t_end, dt)
        residual = float(np.abs(trayectoria.final_state - q.q).sum())
        return CheckReport.from_residual(
            name="markov_dual",
            residual=residual,
            tolerance=self._tol(self.MARKOV_TOL),
            seed=seed,
            context={"n": L.n, "t_end": t_end, "dt": dt, "stopped_early": trayectoria.stopped_early},
        )

    def check_markov_stationary(self, L: LaplacianMatrix, t_end: float, dt: float, seed: Optional[int] = None) -> CheckReport:
        """p₀ = q permanece fijo"""
        q = graph_service.perron_vector(L)
        trayectoria = flow_service.markov_dual(L, q.q, t_end, dt, stop_early=False)
        residual = float(np.abs(trayectoria.states - q.q).max())
        return CheckReport.from_residual(
            name="markov_stationary",
            residual=residual,
            tolerance=self._tol(self.STATIONARY_TOL),
            seed=seed,
            context={"n": L.n, "t_end": t_end},
        )

    def check_nonlinear_flow(
        self,
        L: LaplacianMatrix,
        x0,
        t_end: float,
        dt: float,
        seed: Optional[int] = None
    ) -> CheckReport:
        """
        Dinámica log-Laplaciana: alcanza ‖x - a·1‖∞ ≤ 1e-6 y V_Gibbs no crece

        Residuo binario: muestras donde V_Gibbs crece más 1 si no se alcanza el consenso.
        """
        x0 = np.asarray(x0, dtype=float)
        alpha = float(x0.mean())
        trayectoria = flow_service.integrate_nonlinear(L, flow_service.log_laplacian_spec(alpha), x0, t_end, dt)
        V = potential_service.normalized_lyapunov(potential_service.builtin_gibbs(), alpha, L.n)
        valores = [potential_service.lyapunov_value(V, x) for x in trayectoria.states]
        crecimientos = sum(1 for k in range(len(valores) - 1) if valores[k + 1] > valores[k])
        distancia = flow_service.distance_to_consensus(trayectoria.final_state, alpha)
        alcanzado = distancia <= self.CONSENSUS_MARGIN
        return CheckReport.from_residual(
            name="nonlinear_flow",
            residual=float(crecimientos + (0 if alcanzado else 1)),
            tolerance=self.BINARY_TOL,
            seed=seed,
            context={
                "n": L.n,
                "t_end": t_end,
                "final_distance": distancia,
                "gibbs_increases": crecimientos,
                "samples": len(trayectoria),
                "sum_drift": abs(float(trayectoria.final_state.sum()) - trayectoria.conserved),
            },
        )

    def check_flow_equivalence(
        self,
        L: LaplacianMatrix,
        H: ConvexPotential,
        x0,
        t_end: float,
        dt: float,
        seed: Optional[int] = None
    ) -> CheckReport:
        """El flujo gradiente con f = h = H′ reproduce la trayectoria lineal"""
        x0 = np.asarray(x0, dtype=float)
        alpha = float(graph_service.perron_vector(L).q @ x0)
        lineal = flow_service.integrate_linear(L, x0, t_end, dt, stop_early=False)
        gradiente = flow_service.integrate_nonlinear(
            L, flow_service.gradient_flow_spec(H, alpha), x0, t_end, dt, stop_early=False
        )
        muestras = min(len(lineal), len(gradiente))
        residual = float(np.abs(lineal.states[:muestras] - gradiente.states[:muestras]).max())
        return CheckReport.from_residual(
            name="flow_equivalence",
            residual=residual / max(1.0, inf_norm(x0)),
            tolerance=self._tol(self.EQUIVALENCE_TOL),
            seed=seed,
            context={"n": L.n, "potential": H.name, "samples": muestras},
        )

    # ==================== SUITE ====================

    def symmetric_instance_checks(self, instance: RandomInstance) -> List[CheckReport]:
        """Chequeos sobre una instancia simétrica"""
        L, q, seed = instance.laplacian, instance.perron, instance.seed
        rng = np.random.default_rng([seed, 1])
        reports: List[CheckReport] = []

        for nombre in BUILTIN_POTENTIALS:
            H = potential_service.potential_by_name(nombre, ref=1.0)
            for x in instance.states:
                reports.append(self.check_theorem2(L, H, x, float(x.mean()), seed=seed))
        x0 = instance.states[0]
        alpha0 = float(x0.mean())
        reports.append(self.check_quadratic_metric(L, x0, alpha0, seed=seed))
        reports.append(self.check_theorem2_negative_control(
            L, potential_service.builtin_gibbs(), x0, alpha0, rng, seed=seed
        ))
        reports.append(self.check_metric_equivalence(L, x0, alpha0, seed=seed))

        reports.extend(self._flow_checks(instance))

        # Identidad de disipación con paso fino
        fina = flow_service.integrate_linear(L, x0, 0.5, 1e-3, stop_early=False)
        reports.append(self.check_dissipation(L, potential_service.sum_of_squares_lyapunov(alpha0, L.n), fina, seed=seed))
        reports.append(self.check_dissipation(L, suite_lyapunov("gibbs", q, alpha0), fina, seed=seed))

        lambda2 = graph_service.algebraic_connectivity(L)
        dt_nl = self._nonlinear_dt(L, x0, alpha0)
        reports.append(self.check_nonlinear_flow(L, x0, 50.0 / lambda2, dt_nl, seed=seed))
        reports.append(self.check_flow_equivalence(
            L, potential_service.builtin_gibbs(), x0, 1.0, self._linear_dt(L), seed=seed
        ))
        nonlinear = flow_service.integrate_nonlinear(
            L, flow_service.log_laplacian_spec(alpha0), x0, 10.0, dt_nl
        )
        if len(nonlinear) >= 2:
            reports.append(self.check_conservation(nonlinear, seed=seed))
        return reports

    def directed_instance_checks(self, instance: RandomInstance) -> List[CheckReport]:
        """Chequeos sobre una instancia dirigida (no simétrica)"""
        L, seed = instance.laplacian, instance.seed
        rng = np.random.default_rng([seed, 2])
        reports = self._flow_checks(instance, symmetric=False)

        lambda2 = graph_service.algebraic_connectivity(L)
        dt = 1.0 / (2.0 * L.max_diagonal)
        p0 = rng.uniform(0.5, 2.0, L.n)
        reports.append(self.check_markov_dual(L, p0 / p0.sum(), 30.0 / lambda2, dt, seed=seed))
        reports.append(self.check_markov_stationary(L, 10.0, dt, seed=seed))
        return reports

    def _flow_checks(self, instance: RandomInstance, symmetric: bool = True) -> List[CheckReport]:
        L, q, seed = instance.laplacian, instance.perron, instance.seed
        x0 = instance.states[0]
        reports = [
            self.check_stochastic_flow(L, seed=seed),
            self.check_semigroup(L, seed=seed),
        ]
        trayectoria = flow_service.integrate_linear(L, x0, 10.0, self._linear_dt(L))
        a = trayectoria.consensus_level
        if len(trayectoria) >= 2:
            reports.append(self.check_conservation(trayectoria, q, seed=seed))
            for nombre in BUILTIN_POTENTIALS:
                reports.append(self.check_monotone(suite_lyapunov(nombre, q, a), trayectoria, seed=seed))
            if symmetric:
                reports.append(self.check_disagreement_decay(L, suite_lyapunov("gibbs", q, a), trayectoria, seed=seed))
        reports.append(self.check_theorem1_necessity(L, x0, seed=seed))
        for nombre in BUILTIN_POTENTIALS:
            reports.append(self.check_gradient(suite_lyapunov(nombre, q, a), x0, seed=seed))
        return reports

    @staticmethod
    def _linear_dt(L: LaplacianMatrix) -> float:
        return min(1e-2, 1.0 / (2.0 * L.max_diagonal))

    @staticmethod
    def _nonlinear_dt(L: LaplacianMatrix, x0: np.ndarray, alpha: float) -> float:
        matriz = flow_service.nonlinear_laplacian(L, flow_service.log_laplacian_spec(alpha), x0)
        return min(0.1, 0.9 / (2.0 * float(np.diag(matriz).max())))

    def run_instance(self, seed: int, n: int, k: int, symmetric: bool) -> List[CheckReport]:
        """Genera la instancia (seed, n, k) y corre sus chequeos"""
        semilla = instance_seed(seed, n, k, symmetric)
        instance = random_instance(semilla, n, symmetric=symmetric)
        if symmetric:
            return self.symmetric_instance_checks(instance)
        return self.directed_instance_checks(instance)

    def run_suite(
        self,
        seed: int,
        count: int,
        sizes: Sequence[int],
        max_workers: int = 1
    ) -> List[CheckReport]:
        """
        Corre todos los chequeos sobre count instancias por tamaño

        Para cada tamaño se generan count instancias simétricas y count
        dirigidas. El orden del resultado no depende de max_workers.

        Raises:
            ConfigurationException: Si count < 1, sizes está vacío o algún tamaño < 2
        """
        if count < 1:
            raise ConfigurationException("count debe ser >= 1", {"count": count})
        if not sizes or any(n < 2 for n in sizes):
            raise ConfigurationException("sizes debe ser no vacío con tamaños >= 2", {"sizes": list(sizes)})

        tareas = [(seed, n, k, symmetric) for n in sizes for k in range(count) for symmetric in (True, False)]
        logger.info(f"Suite de verificación: seed={seed}, count={count}, sizes={list(sizes)}, instancias={len(tareas)}")

        if max_workers > 1:
            with ProcessPoolExecutor(max_workers=max_workers) as executor:
                resultados = list(executor.map(partial(_run_instance_task, self.tolerance_scale), tareas))
        else:
            resultados = [self.run_instance(*args) for args in tareas]

        reports = [r for bloque in resultados for r in bloque]
        fallidos = [r for r in reports if r.counts_as_failure]
        for r in fallidos:
            logger.warning(f"Chequeo fallido: {format_report_line(r)}")
        logger.info(f"Suite completa: {len(reports)} chequeos, {len(fallidos)} fallidos")
        return reports


def _run_instance_task(tolerance_scale: float, tarea: Tuple[int, int, int, bool]) -> List[CheckReport]:
    """Punto de entrada de los procesos de la suite"""
    return VerificationService(tolerance_scale).run_instance(*tarea)
