/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_curves_free: (a: number, b: number) => void;
export const __wbg_fitdemo_free: (a: number, b: number) => void;
export const __wbg_histogram_free: (a: number, b: number) => void;
export const curves: (a: number, b: number, c: number, d: number) => [number, number, number];
export const curves_antimode: (a: number) => number;
export const curves_hazard: (a: number) => [number, number];
export const curves_increasingAtEnd: (a: number) => number;
export const curves_modes: (a: number) => [number, number];
export const curves_pdf: (a: number) => [number, number];
export const curves_t: (a: number) => [number, number];
export const curves_turning: (a: number) => [number, number];
export const fit_demo: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number];
export const fitdemo_estimate: (a: number) => [number, number];
export const fitdemo_gcsMean: (a: number) => number;
export const fitdemo_hi: (a: number) => [number, number];
export const fitdemo_iterations: (a: number) => number;
export const fitdemo_lo: (a: number) => [number, number];
export const fitdemo_loglik: (a: number) => number;
export const fitdemo_observed: (a: number) => [number, number];
export const fitdemo_outside: (a: number) => number;
export const fitdemo_se: (a: number) => [number, number];
export const fitdemo_theoretical: (a: number) => [number, number];
export const fitdemo_truth: (a: number) => [number, number];
export const histogram_density: (a: number) => [number, number];
export const histogram_edges: (a: number) => [number, number];
export const histogram_exact: (a: number) => [number, number];
export const histogram_ks: (a: number) => number;
export const histogram_outside: (a: number) => number;
export const sample_histogram: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
