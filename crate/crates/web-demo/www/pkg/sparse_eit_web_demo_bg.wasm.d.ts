/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demoreconstruction_free: (a: number, b: number) => void;
export const __wbg_diskfield_free: (a: number, b: number) => void;
export const demoreconstruction_backgroundError: (a: number) => number;
export const demoreconstruction_discrepancy: (a: number) => [number, number];
export const demoreconstruction_iterations: (a: number) => number;
export const demoreconstruction_relativeError: (a: number) => number;
export const demoreconstruction_sigma: (a: number) => number;
export const demoreconstruction_termination: (a: number) => [number, number];
export const demoreconstruction_truth: (a: number) => number;
export const diskfield_triangles: (a: number) => [number, number];
export const diskfield_values: (a: number) => [number, number];
export const diskfield_xy: (a: number) => [number, number];
export const ndmapCheck: (a: number, b: number) => [number, number, number, number];
export const phantomField: (a: number) => [number, number, number];
export const reconstructDisk: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
