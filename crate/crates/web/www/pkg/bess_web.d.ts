/* tslint:disable */
/* eslint-disable */

/**
 * Closed-loop run over a synthetic trace.
 */
export class Run {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `[tde, tce, tse]` in kWh.
     */
    metrics(): Float64Array;
    p0(): Float64Array;
    p(): Float64Array;
    soc(): Float64Array;
    t(): Float64Array;
}

/**
 * Projects `(p0, q0)`; returns `[p, q]`. `method` is `"opt"` or `"fast"`.
 */
export function project(p0: number, q0: number, vac: number, vdc: number, soc: number, method: string): Float64Array;

/**
 * Per-sector maximum radii; entry `k` belongs to angle `(k + 1)·resolution`.
 */
export function ray_table(vac: number, vdc: number, soc: number, resolution_deg: number): Float64Array;

/**
 * `alpha` is the frequency droop in MW/Hz (negative: under-frequency discharges),
 * `method` one of `"opt"`, `"fast"`, `"baseline"`.
 */
export function simulate(seed: bigint, duration_s: number, alpha: number, method: string): Run;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_run_free: (a: number, b: number) => void;
    readonly project: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly ray_table: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly run_metrics: (a: number) => [number, number];
    readonly run_p: (a: number) => [number, number];
    readonly run_p0: (a: number) => [number, number];
    readonly run_soc: (a: number) => [number, number];
    readonly run_t: (a: number) => [number, number];
    readonly simulate: (a: bigint, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
