/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const asymptote: (a: number) => number;
export const capacity_curve: (a: number, b: number) => [number, number, number, number];
export const ci_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const critical_noise: () => [number, number, number];
export const delta_ci_scan: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const sign_change: (a: number, b: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
