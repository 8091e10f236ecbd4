/**
 * Headless view-model: a scene payload becomes a three.js group of
 * oriented boxes. No renderer, canvas, or DOM in here, so the exact
 * objects the browser draws can also be asserted on under vitest.
 *
 * Conventions carried over from the server: meters, +Z up, +Y front,
 * translation is the box center, yaw spins around +Z, scale is uniform.
 */

import * as THREE from "three";
import type { CameraWire, ModelWire, SceneWire } from "./wire";

export const HIGHLIGHT_COLOR = 0x2ecc71;
export const ROOM_COLOR = 0x8a97a3;

export interface InstanceUserData {
  id: string;
  category: string;
  highlighted: boolean;
  pickable: boolean;
}

export interface SceneView {
  root: THREE.Group;
  byId: Map<string, THREE.Object3D>;
  highlighted: Set<string>;
  /** Meshes eligible for click-selection (rooms are walls, not targets). */
  pickables: THREE.Mesh[];
}

/** Stable color per category: FNV-1a hash onto the hue wheel. */
export function categoryColor(category: string): THREE.Color {
  let h = 0x811c9dc5;
  for (let i = 0; i < category.length; i++) {
    h ^= category.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  const hue = (h >>> 0) % 360;
  return new THREE.Color().setHSL(hue / 360, 0.55, 0.55);
}

function placed(node: THREE.Object3D, inst: SceneWire["instances"][number]) {
  node.position.set(...inst.translation);
  node.rotation.z = inst.yaw;
  node.scale.setScalar(inst.scale);
}

export function buildSceneView(
  scene: SceneWire,
  models: Map<string, ModelWire>,
  selection: Iterable<string>
): SceneView {
  const chosen = new Set(selection);
  const root = new THREE.Group();
  root.name = "scene";
  const byId = new Map<string, THREE.Object3D>();
  const highlighted = new Set<string>();
  const pickables: THREE.Mesh[] = [];

  for (const inst of scene.instances) {
    const model = models.get(inst.modelId);
    if (!model) {
      throw new Error(`scene references model ${inst.modelId} with no catalog entry`);
    }
    const [hx, hy, hz] = model.halfExtents;
    const box = new THREE.BoxGeometry(2 * hx, 2 * hy, 2 * hz);
    const isRoom = model.category === "room";
    const isSelected = chosen.has(inst.id);

    let node: THREE.Object3D;
    if (isRoom) {
      // The room is the shell everything sits in; draw edges only so it
      // never hides its contents.
      node = new THREE.LineSegments(
        new THREE.EdgesGeometry(box),
        new THREE.LineBasicMaterial({
          color: isSelected ? HIGHLIGHT_COLOR : ROOM_COLOR,
        })
      );
    } else {
      const material = new THREE.MeshLambertMaterial({
        color: isSelected ? new THREE.Color(HIGHLIGHT_COLOR) : categoryColor(model.category),
      });
      if (isSelected) {
        material.emissive = new THREE.Color(HIGHLIGHT_COLOR);
        material.emissiveIntensity = 0.35;
      }
      const mesh = new THREE.Mesh(box, material);
      pickables.push(mesh);
      node = mesh;
    }

    placed(node, inst);
    node.name = inst.id;
    const userData: InstanceUserData = {
      id: inst.id,
      category: model.category,
      highlighted: isSelected,
      pickable: !isRoom,
    };
    node.userData = userData;
    if (isSelected) highlighted.add(inst.id);
    root.add(node);
    byId.set(inst.id, node);
  }

  return { root, byId, highlighted, pickables };
}

/** Adopt the server's viewpoint; orbiting afterwards is a local overlay. */
export function applyServerCamera(
  camera: THREE.PerspectiveCamera,
  wire: CameraWire
): void {
  camera.up.set(...wire.up);
  camera.position.set(...wire.position);
  camera.fov = wire.fovDegrees;
  camera.lookAt(new THREE.Vector3(...wire.target));
  camera.updateProjectionMatrix();
  camera.updateMatrixWorld(true);
}
