/* tslint:disable */
/* eslint-disable */

/**
 * Correlation tables for a pasted groups table (which must carry `nci`)
 * and an optional disciplines table.
 */
export function correlate_csv(groups_csv: string, disciplines_csv: string, alpha: number): string;

/**
 * Generates one synthetic cohort for plotting, then repeats the
 * experiment over `runs` seeds.
 */
export function inflation_demo(params: string): string;

/**
 * Per-discipline rankings by s1, i, S1 and I.
 */
export function rank_csv(groups_csv: string, disciplines_csv: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly correlate_csv: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly inflation_demo: (a: number, b: number) => [number, number, number, number];
    readonly rank_csv: (a: number, b: number, c: number, d: number) => [number, number, number, number];
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
