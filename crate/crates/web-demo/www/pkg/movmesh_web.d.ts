/* tslint:disable */
/* eslint-disable */

/**
 * Result of a 1D solve at the final level.
 */
export class Solve1D {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Discrete energy per level.
     */
    readonly energy: Float64Array;
    readonly exact: Float64Array;
    /**
     * Max nodal error at the final level.
     */
    readonly max_error: number;
    readonly u: Float64Array;
    readonly x: Float64Array;
}

export function mesh2d(omega: number, j_max: number, k_max: number, t: number): Float64Array;

export function meshTrajectories(example: string, omega: number, j_max: number, t_end: number, steps: number): Float64Array;

export function solve1d(example: string, omega: number, m: number, j_max: number, t_end: number, steps: number, homogeneous: boolean): Solve1D;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_solve1d_free: (a: number, b: number) => void;
    readonly mesh2d: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly meshTrajectories: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly solve1d: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
    readonly solve1d_energy: (a: number) => [number, number];
    readonly solve1d_exact: (a: number) => [number, number];
    readonly solve1d_max_error: (a: number) => number;
    readonly solve1d_u: (a: number) => [number, number];
    readonly solve1d_x: (a: number) => [number, number];
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
