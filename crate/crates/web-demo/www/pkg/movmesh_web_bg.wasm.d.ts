/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_solve1d_free: (a: number, b: number) => void;
export const mesh2d: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const meshTrajectories: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const solve1d: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
export const solve1d_energy: (a: number) => [number, number];
export const solve1d_exact: (a: number) => [number, number];
export const solve1d_max_error: (a: number) => number;
export const solve1d_u: (a: number) => [number, number];
export const solve1d_x: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
