/* tslint:disable */
/* eslint-disable */

/**
 * Random geometric graph with a `k`-bandlimited signal, sampled at `r`
 * nodes (greedy when `greedy`, otherwise uniform) and recovered in one shot.
 */
export function bandlimited_recovery(n: number, k: number, r: number, seed: number, greedy: boolean): string;

/**
 * Smoothness of a signal on a star with node 0 at the centre.
 * `values_json` holds one value per node; its length sets the star size.
 */
export function star_smoothness(values_json: string): string;

/**
 * Three-cluster toy: label the picked nodes and propagate by iterative
 * interpolation. `picks_json` is an array of node indices; an empty array
 * picks the first member of each cluster.
 */
export function toy_classify(seed: number, picks_json: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bandlimited_recovery: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly star_smoothness: (a: number, b: number) => [number, number];
    readonly toy_classify: (a: number, b: number, c: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
