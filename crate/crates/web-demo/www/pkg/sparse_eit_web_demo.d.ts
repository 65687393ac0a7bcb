/* tslint:disable */
/* eslint-disable */

export class DemoReconstruction {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    backgroundError(): number;
    /**
     * Discrepancy before the first step and after every accepted one.
     */
    discrepancy(): Float64Array;
    iterations(): number;
    relativeError(): number;
    sigma(): DiskField;
    termination(): string;
    truth(): DiskField;
}

/**
 * A nodal field on a triangulated disk, flattened for drawing.
 */
export class DiskField {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Three vertex indices per triangle.
     */
    triangles(): Uint32Array;
    values(): Float64Array;
    /**
     * Interleaved `x, y` vertex coordinates.
     */
    xy(): Float64Array;
}

export function ndmapCheck(refinement: number, n_max: number): Float64Array;

export function phantomField(refinement: number): DiskField;

/**
 * `support` is `"full"`, `"upper-half"` or `"lower-half"`.
 */
export function reconstructDisk(refinement: number, n_max: number, support: string, alpha: number, epsilon: number, prior: boolean, seed: number, max_iterations: number): DemoReconstruction;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demoreconstruction_free: (a: number, b: number) => void;
    readonly __wbg_diskfield_free: (a: number, b: number) => void;
    readonly demoreconstruction_backgroundError: (a: number) => number;
    readonly demoreconstruction_discrepancy: (a: number) => [number, number];
    readonly demoreconstruction_iterations: (a: number) => number;
    readonly demoreconstruction_relativeError: (a: number) => number;
    readonly demoreconstruction_sigma: (a: number) => number;
    readonly demoreconstruction_termination: (a: number) => [number, number];
    readonly demoreconstruction_truth: (a: number) => number;
    readonly diskfield_triangles: (a: number) => [number, number];
    readonly diskfield_values: (a: number) => [number, number];
    readonly diskfield_xy: (a: number) => [number, number];
    readonly ndmapCheck: (a: number, b: number) => [number, number, number, number];
    readonly phantomField: (a: number) => [number, number, number];
    readonly reconstructDisk: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
