/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_run_free: (a: number, b: number) => void;
export const project: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const ray_table: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const run_metrics: (a: number) => [number, number];
export const run_p: (a: number) => [number, number];
export const run_p0: (a: number) => [number, number];
export const run_soc: (a: number) => [number, number];
export const run_t: (a: number) => [number, number];
export const simulate: (a: bigint, b: number, c: number, d: number, e: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
