/* tslint:disable */
/* eslint-disable */

/**
 * Coupled two-patch beam solve sampled along the midline.
 */
export class BeamRun {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    dofs(): number;
    /**
     * Relative L2 error of the sampled midline deflection.
     */
    midline_error(): number;
    min_pivot(): number;
    sxy(): Float64Array;
    tip_exact(): number;
    tip(): number;
    uy_exact(): Float64Array;
    uy(): Float64Array;
    x(): Float64Array;
}

/**
 * Row 0 holds the sample parameters, then one row per basis function.
 */
export function basis_functions(degree: number, knots: Float64Array, samples: number): Float64Array;

/**
 * CSV table as written by the `converge` command.
 */
export function convergence(degree: number, levels: number): string;

export function solve_beam(degree: number, left_x: number, left_y: number, right_x: number, right_y: number, alpha: number, samples: number): BeamRun;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_beamrun_free: (a: number, b: number) => void;
    readonly basis_functions: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly beamrun_dofs: (a: number) => number;
    readonly beamrun_midline_error: (a: number) => number;
    readonly beamrun_min_pivot: (a: number) => number;
    readonly beamrun_sxy: (a: number) => [number, number];
    readonly beamrun_tip: (a: number) => number;
    readonly beamrun_tip_exact: (a: number) => number;
    readonly beamrun_uy: (a: number) => [number, number];
    readonly beamrun_uy_exact: (a: number) => [number, number];
    readonly beamrun_x: (a: number) => [number, number];
    readonly convergence: (a: number, b: number) => [number, number, number, number];
    readonly solve_beam: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
