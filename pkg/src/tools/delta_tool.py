"""
Delta Tool

Evaluates change functionals over fitted chains: the change in return
value (Q) for GEVR chains and the change in mean (M) for NHGR chains, in
its parametric and/or predictive form. Draws whose extrapolated parameters
leave their domain are excluded and counted in the sidecar. The predictive
M change applies the mean-positivity rule the chain was fitted under.

Chains fitted to negated minima are mapped back, so a Q change for a
minimum is reported in original units under the ``min`` key.

Example:
    tool = DeltaTool()
    result = tool.execute(run=run, inputs=[Path("chains/")], kind="auto")
"""

from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.core.errors import InvalidExtrapolationError, UsageError
from src.core.rng import stream
from src.models.chain import PosteriorChain
from src.models.identifiers import Statistic
from src.models.params import GevrParams, NhgrParams, ReturnSpec
from src.models.run import RunConfig
from src.models.synoptic import DeltaDraws, DeltaKind
from src.models.tool_result import ToolResult
from src.services.io_service import FLOAT_FORMAT, expand_inputs, load_chain, write_delta
from src.stats.gevr import delta_q, return_values
from src.stats.mcmc import posterior_functional
from src.stats.nhgr import delta_m_parametric, delta_m_predictive
from src.tools.base import BaseTool

KIND_CHOICES = ("Q", "M", "auto")
MODE_CHOICES = ("parametric", "predictive", "both")


def _m_variants(mode: str) -> List[str]:
    return ["parametric", "predictive"] if mode == "both" else [mode]


class DeltaTool(BaseTool):
    """Posterior change draws per chain."""

    @property
    def name(self) -> str:
        return "delta"

    @property
    def description(self) -> str:
        return "Compute change-in-return-value or change-in-mean draws from chains"

    def validate_params(self, kind: str = "auto", delta_m_mode: str = "predictive", **kwargs) -> bool:
        return kind in KIND_CHOICES and delta_m_mode in MODE_CHOICES

    def _functionals(
        self,
        chain: PosteriorChain,
        kind: DeltaKind,
        spec: ReturnSpec,
        mode: str,
        seed: int,
    ) -> Dict[Optional[str], Callable[[np.ndarray], float]]:
        window = chain.window
        if kind == DeltaKind.Q:
            if chain.model != "gevr":
                raise UsageError(f"Q changes need a GEVR chain, not {chain.model}")
            sign = -1.0 if chain.negated else 1.0
            return {None: lambda theta: sign * delta_q(GevrParams.from_vector(theta), spec, window)}

        if chain.model != "nhgr":
            raise UsageError(f"M changes need an NHGR chain, not {chain.model}")
        functionals: Dict[Optional[str], Callable[[np.ndarray], float]] = {}
        for variant in _m_variants(mode):
            if variant == "parametric":
                functionals[variant] = lambda theta: delta_m_parametric(
                    NhgrParams.from_vector(theta), spec, window,
                )
            else:
                rng = stream(seed, chain.key.slug(), "delta_M")
                functionals[variant] = lambda theta, rng=rng: delta_m_predictive(
                    NhgrParams.from_vector(theta), rng, spec, window, chain.require_positive_mean,
                )
        return functionals

    def _process(
        self,
        path: Path,
        run: RunConfig,
        kind: str,
        mode: str,
        export_return_values: bool,
    ) -> List[Path]:
        chain = load_chain(path)
        if chain.key is None:
            raise UsageError(f"{path.name}: chain sidecar has no dataset key")
        resolved = DeltaKind(kind) if kind != "auto" else (DeltaKind.Q if chain.model == "gevr" else DeltaKind.M)
        key = chain.key.with_(statistic=Statistic.MIN) if chain.negated else chain.key
        spec = run.returns or ReturnSpec()

        written: List[Path] = []
        functionals = self._functionals(chain, resolved, spec, mode, run.seed)
        for variant, f in functionals.items():
            values = posterior_functional(chain, f)
            draws = DeltaDraws(
                key=key, kind=resolved, draws=values.values,
                excluded_count=values.excluded_count, variant=variant,
            )
            written.extend(write_delta(draws, run.out, {
                "excluded_by": values.excluded_by,
                "require_positive_mean": chain.require_positive_mean,
                "n_draws": chain.n_draws,
                "n_valid": int(values.values.size),
                "returns": spec.model_dump(),
                "window": chain.window.model_dump(),
                "source_chain": path.name,
            }))
            self.logger.progress(
                f"{key.slug()}: {resolved.value}{'/' + variant if variant else ''} "
                f"mean {float(np.mean(values.values)):.4g}, excluded {values.excluded_count}",
                task_id=self.name,
            )

        if export_return_values and resolved == DeltaKind.Q:
            written.append(self._export_return_values(chain, key.slug(), spec, Path(run.out)))
        return written

    def _export_return_values(self, chain: PosteriorChain, slug: str, spec: ReturnSpec, out_dir: Path) -> Path:
        sign = -1.0 if chain.negated else 1.0
        rows = []
        for i, theta in enumerate(chain.draws, start=1):
            try:
                q_from, q_to = return_values(GevrParams.from_vector(theta), spec, chain.window)
            except InvalidExtrapolationError:
                continue
            rows.append({"draw": i, "q_from": sign * q_from, "q_to": sign * q_to})
        path = out_dir / f"{slug}.return_values.csv"
        pd.DataFrame(rows, columns=["draw", "q_from", "q_to"]).to_csv(
            path, index=False, float_format=FLOAT_FORMAT,
        )
        return path

    def _execute_impl(
        self,
        run: RunConfig,
        inputs: Sequence[Path] = (),
        kind: str = "auto",
        delta_m_mode: str = "predictive",
        export_return_values: bool = False,
        strict: bool = False,
        **_,
    ) -> ToolResult:
        chains = expand_inputs(inputs, "*.chain.csv")
        if not chains:
            raise UsageError("no chain files given")
        Path(run.out).mkdir(parents=True, exist_ok=True)

        outputs: List[Path] = []
        failures = []
        for path in chains:
            written, failure = self._isolated(path, lambda: self._process(
                path, run, kind, delta_m_mode, export_return_values,
            ))
            if failure:
                failures.append(failure)
            else:
                outputs.extend(written)

        inputs_used = chains + [p.with_name(p.name[: -len(".csv")] + ".json") for p in chains]
        return self._finish(run, inputs=[p for p in inputs_used if p.is_file()],
                            outputs=outputs, failures=failures, strict=strict)
