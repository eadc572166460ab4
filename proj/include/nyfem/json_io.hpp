#pragma once

#include "nyfem/geometry.hpp"
#include "nyfem/mesh.hpp"

#include <string>

namespace nyfem {

/// Element from JSON text:
///   {"label": "...", "vertices": [[x,y],...],
///    "edges": [{"kind":"straight"} | {"kind":"arc","center":[x,y],"sweep":s}
///              | {"kind":"sine","amplitude":a,"periods":k}, ...]}
/// "edges" may be omitted for a straight-edged polygon.
Element element_from_json(const std::string& text);

/// Mesh from JSON text:
///   {"id": "...", "vertices": [[x,y],...],
///    "cells": [[i,j,k,...] | {"vertices":[i,j,...], "edges":[...]}, ...]}
Mesh mesh_from_json(const std::string& text);

std::string element_to_json(const Element& el);
std::string mesh_to_json(const Mesh& mesh);

Element load_element(const std::string& path);
Mesh load_mesh(const std::string& path);

}  // namespace nyfem
