/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_beamrun_free: (a: number, b: number) => void;
export const basis_functions: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const beamrun_dofs: (a: number) => number;
export const beamrun_midline_error: (a: number) => number;
export const beamrun_min_pivot: (a: number) => number;
export const beamrun_sxy: (a: number) => [number, number];
export const beamrun_tip: (a: number) => number;
export const beamrun_tip_exact: (a: number) => number;
export const beamrun_uy: (a: number) => [number, number];
export const beamrun_uy_exact: (a: number) => [number, number];
export const beamrun_x: (a: number) => [number, number];
export const convergence: (a: number, b: number) => [number, number, number, number];
export const solve_beam: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
