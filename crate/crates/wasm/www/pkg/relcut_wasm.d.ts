/* tslint:disable */
/* eslint-disable */

/**
 * `(x, h(x), h̄(x))` on `points` evenly spaced `x` in `[0, 1]`.
 */
export function bound_curves(beta: number, delta: number, points: number): Float64Array;

/**
 * Mean potential `S_i` over `runs` contraction runs on an odd-min-cut
 * graph, with the bound `f_odd(i, n, k)`, as `(i, mean, bound)` triples
 * for `i = 3..n`. `k` is the exact min-cut count, so `n` is capped at 20.
 */
export function potential_curve(name: string, runs: number, seed: bigint): Float64Array;

/**
 * Unreliability at `points` values of `p` spaced log-uniformly in
 * `[p_lo, p_hi]`, as `(p, estimate, exact, method)` quadruples. `exact` is
 * NaN when the graph is too large for the oracle; `method` is 0 for
 * Monte-Carlo and 1 for cut enumeration.
 */
export function reliability_curve(name: string, p_lo: number, p_hi: number, points: number, eps: number, seed: bigint): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bound_curves: (a: number, b: number, c: number) => [number, number, number, number];
    readonly potential_curve: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
    readonly reliability_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
