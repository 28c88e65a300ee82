/* tslint:disable */
/* eslint-disable */

/**
 * `−log₂(eN)`.
 */
export function asymptote(noise: number): number;

export function capacity_curve(n_max: number, points: number): Float64Array;

export function ci_curve(noise: number, ns_lo: number, ns_hi: number, points: number): Float64Array;

/**
 * Critical noise of the certification, computed once.
 */
export function critical_noise(): number;

export function delta_ci_scan(noise: number, two_mode: boolean, ns_lo: number, ns_hi: number, points: number): Float64Array;

/**
 * Sign change `N_s0` of `ΔI_c`, or NaN when there is none.
 */
export function sign_change(noise: number, two_mode: boolean): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly asymptote: (a: number) => number;
    readonly capacity_curve: (a: number, b: number) => [number, number, number, number];
    readonly ci_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly critical_noise: () => [number, number, number];
    readonly delta_ci_scan: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly sign_change: (a: number, b: number) => number;
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
