/**
 * Wire formats of the scene service, validated with zod at the trust
 * boundary. Shapes mirror the server JSON exactly, so drift shows up
 * here as a parse error instead of as NaNs deep inside three.js.
 */

import { z } from "zod";

export const vec3 = z.tuple([z.number(), z.number(), z.number()]);
export const vec2 = z.tuple([z.number(), z.number()]);

export const instanceSchema = z.object({
  id: z.string(),
  modelId: z.string(),
  parentId: z.string().optional(),
  surfaceIndex: z.number().int().nonnegative().optional(),
  posOnSurface: vec2,
  yaw: z.number(),
  scale: z.number().positive(),
  translation: vec3,
});

export const sceneSchema = z.object({
  sceneType: z.string(),
  instances: z.array(instanceSchema),
  degraded: z.boolean().optional(),
});

export const cameraSchema = z.object({
  position: vec3,
  target: vec3,
  up: vec3,
  fovDegrees: z.number().positive(),
});

export const stateSchema = z.object({
  scene: sceneSchema,
  camera: cameraSchema,
  selection: z.array(z.string()),
});

export const sessionSchema = z.object({
  id: z.string(),
  seed: z.number(),
  condition: z.string(),
  state: stateSchema,
});

export const textResponseSchema = z.object({
  parsed: z.unknown(),
  state: stateSchema,
  warnings: z.array(z.string()),
  degradedFlag: z.boolean(),
});

export const journalSchema = z.object({
  seed: z.number(),
  utterances: z.array(z.string()),
  entries: z.array(
    z.object({
      timestamp: z.number(),
      rawText: z.string(),
      parsedOp: z.unknown(),
      changedIds: z.array(z.string()),
    })
  ),
});

export const surfaceSchema = z.object({
  normalClass: z.string(),
  facing: z.string(),
  center: vec3,
  axes: z.array(vec3),
});

export const modelSchema = z.object({
  id: z.string(),
  category: z.string(),
  halfExtents: vec3,
  tags: z.array(z.string()),
  attributes: z.array(z.tuple([z.string(), z.string()])),
  surfaces: z.array(surfaceSchema),
});

export const errorSchema = z.object({
  code: z.string(),
  message: z.string(),
  span: z.tuple([z.number().int(), z.number().int()]).optional(),
});

export type Vec3 = z.infer<typeof vec3>;
export type InstanceWire = z.infer<typeof instanceSchema>;
export type SceneWire = z.infer<typeof sceneSchema>;
export type CameraWire = z.infer<typeof cameraSchema>;
export type StateWire = z.infer<typeof stateSchema>;
export type SessionWire = z.infer<typeof sessionSchema>;
export type TextResponseWire = z.infer<typeof textResponseSchema>;
export type JournalWire = z.infer<typeof journalSchema>;
export type ModelWire = z.infer<typeof modelSchema>;
export type ErrorWire = z.infer<typeof errorSchema>;
