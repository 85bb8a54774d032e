/* tslint:disable */
/* eslint-disable */

/**
 * Density and hazard on a grid, with the mode structure.
 */
export class Curves {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * NaN when unimodal.
     */
    readonly antimode: number;
    readonly hazard: Float64Array;
    readonly increasingAtEnd: boolean;
    /**
     * One mode when unimodal, (t₋, t₊) when bimodal.
     */
    readonly modes: Float64Array;
    readonly pdf: Float64Array;
    readonly t: Float64Array;
    readonly turning: Float64Array;
}

/**
 * Regression fit on simulated data with a QQ envelope of the
 * randomized quantile residuals.
 */
export class FitDemo {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly estimate: Float64Array;
    readonly gcsMean: number;
    readonly hi: Float64Array;
    readonly iterations: number;
    readonly lo: Float64Array;
    readonly loglik: number;
    readonly observed: Float64Array;
    readonly outside: number;
    readonly se: Float64Array;
    readonly theoretical: Float64Array;
    /**
     * (β₀, β₁, ρ₀, ρ₁)
     */
    readonly truth: Float64Array;
}

/**
 * Histogram of a sample against the exact density.
 */
export class Histogram {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Empirical density per bin.
     */
    readonly density: Float64Array;
    readonly edges: Float64Array;
    /**
     * Exact density at bin midpoints.
     */
    readonly exact: Float64Array;
    /**
     * Kolmogorov–Smirnov distance to the exact CDF.
     */
    readonly ks: number;
    /**
     * Draws beyond the last edge.
     */
    readonly outside: number;
}

export function curves(alpha: number, theta: number, tmax: number, points: number): Curves;

/**
 * ln θᵢ = β₀ + β₁xᵢ, ln αᵢ = ρ₀ + ρ₁wᵢ with x, w ~ U(−1, 1).
 */
export function fit_demo(n: number, beta0: number, beta1: number, rho0: number, rho1: number, sims: number, seed: bigint): FitDemo;

export function sample_histogram(alpha: number, theta: number, n: number, bins: number, seed: bigint): Histogram;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_curves_free: (a: number, b: number) => void;
    readonly __wbg_fitdemo_free: (a: number, b: number) => void;
    readonly __wbg_histogram_free: (a: number, b: number) => void;
    readonly curves: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly curves_antimode: (a: number) => number;
    readonly curves_hazard: (a: number) => [number, number];
    readonly curves_increasingAtEnd: (a: number) => number;
    readonly curves_modes: (a: number) => [number, number];
    readonly curves_pdf: (a: number) => [number, number];
    readonly curves_t: (a: number) => [number, number];
    readonly curves_turning: (a: number) => [number, number];
    readonly fit_demo: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number];
    readonly fitdemo_estimate: (a: number) => [number, number];
    readonly fitdemo_gcsMean: (a: number) => number;
    readonly fitdemo_hi: (a: number) => [number, number];
    readonly fitdemo_iterations: (a: number) => number;
    readonly fitdemo_lo: (a: number) => [number, number];
    readonly fitdemo_loglik: (a: number) => number;
    readonly fitdemo_observed: (a: number) => [number, number];
    readonly fitdemo_outside: (a: number) => number;
    readonly fitdemo_se: (a: number) => [number, number];
    readonly fitdemo_theoretical: (a: number) => [number, number];
    readonly fitdemo_truth: (a: number) => [number, number];
    readonly histogram_density: (a: number) => [number, number];
    readonly histogram_edges: (a: number) => [number, number];
    readonly histogram_exact: (a: number) => [number, number];
    readonly histogram_ks: (a: number) => number;
    readonly histogram_outside: (a: number) => number;
    readonly sample_histogram: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
