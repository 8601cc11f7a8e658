/* tslint:disable */
/* eslint-disable */

/**
 * Frequency of the unit time segment at the origin reaching the boundary of
 * the box of radius m, next to the branching lower bound on its decay rate.
 */
export function connectivity(lambda: number, delta: number, m_max: number, trials: number, seed: number): string;

/**
 * Exact ground-state reduced state of the block of length L + 1 in a chain
 * of 2m + L + 1 sites at λ = θ, δ = 1: spectrum and entropy.
 */
export function exact_entropy(theta: number, m: number, l: number): string;

/**
 * Monte Carlo slit-box estimate of the thermal reduced state against the
 * exact one, entry by entry.
 */
export function rdm_check(theta: number, m: number, l: number, beta: number, sweeps: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly connectivity: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly exact_entropy: (a: number, b: number, c: number) => [number, number, number, number];
    readonly rdm_check: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
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
