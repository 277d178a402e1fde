#!/usr/bin/env python3

from .models import MockModels
