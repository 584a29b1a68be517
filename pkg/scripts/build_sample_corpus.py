#!/usr/bin/env python3
"""Regenerate the bundled sample corpus (deterministic).

Writes src/recipelab/data/sample_recipes.jsonl: ~230 synthetic recipes built
from dish templates with enough slot variety to be non-trivial but enough
structure that a desk-scale model trains in minutes. A few deliberately
broken records at the end exercise the corpus filters.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "recipelab" / "data" / "sample_recipes.jsonl"

ADJECTIVES = ["Classic", "Creamy", "Spicy", "Rustic", "Golden", "Hearty", "Zesty",
              "Smoky", "Fresh", "Garlicky", "Savory", "Sweet", "Tangy", "Simple"]

SOUP_VEG = ["tomatoes", "carrots", "mushrooms", "leeks", "potatoes", "onions",
            "celery", "cauliflower", "zucchini", "pumpkin", "lentils", "peas"]
SOUP_PROTEIN = ["chicken", "beef", "sausage", "bacon", "tofu", "beans"]
HERBS = ["thyme", "basil", "oregano", "rosemary", "parsley", "dill", "sage", "cilantro"]
GREENS = ["romaine lettuce", "baby spinach", "arugula", "kale", "mixed greens"]
SALAD_VEG = ["cucumbers", "tomatoes", "radishes", "carrots", "peppers", "avocado", "beets"]
CHEESES = ["feta cheese", "shredded provolone cheese", "grated parmesan", "goat cheese",
           "crumbled blue cheese", "fresh mozzarella", "sharp cheddar"]
DRESSINGS = ["olive oil", "balsamic vinaigrette", "lemon dressing", "ranch dressing"]
PASTAS = ["spaghetti", "penne", "fettuccine", "linguine", "macaroni", "orzo"]
PASTA_EXTRAS = ["garlic", "mushrooms", "spinach", "cherry tomatoes", "broccoli",
                "shrimp", "pancetta", "artichokes"]
BAKE_SUGARS = ["brown sugar", "granulated sugar", "honey", "maple syrup"]
BAKE_LIQUIDS = ["milk", "buttermilk", "cream", "yogurt"]
BAKE_MIXINS = ["chocolate chips", "chopped walnuts", "raisins", "blueberries",
               "shredded coconut", "dried cranberries", "mashed bananas", "grated apples"]
BAKE_KINDS = ["Muffins", "Cookies", "Loaf", "Pancakes", "Scones", "Brownies"]
STIR_PROTEIN = ["chicken", "beef", "pork", "shrimp", "tofu"]
STIR_VEG = ["broccoli", "peppers", "snap peas", "carrots", "mushrooms", "cabbage", "zucchini"]
ROAST_MAINS = ["chicken thighs", "pork tenderloin", "salmon fillets", "cauliflower",
               "sweet potatoes", "brussels sprouts", "lamb chops"]
SANDWICH_FILLS = ["turkey", "ham", "roast beef", "grilled chicken", "smoked salmon", "hummus"]
SANDWICH_TOPS = ["lettuce", "tomatoes", "pickles", "red onions", "sprouts", "avocado"]
BREADS = ["sourdough bread", "rye bread", "ciabatta rolls", "whole wheat bread", "baguette"]
SPIRITS = ["vodka", "rum", "gin", "tequila", "bourbon"]
JUICES = ["orange juice", "cranberry juice", "pineapple juice", "grapefruit juice", "lime juice"]
GRAINS = ["rice", "quinoa", "couscous", "barley", "bulgur"]
CASSEROLE_MAINS = ["chicken", "ground beef", "turkey", "ham", "tuna"]
CASSEROLE_VEG = ["green beans", "corn", "peas", "mushrooms", "spinach", "broccoli"]


def soup(rng, adj, veg, protein):
    herb = rng.choice(HERBS)
    minutes = rng.choice([10, 15, 20, 25])
    simmer = rng.choice([20, 25, 30, 40])
    title = f"{adj} {veg.title()} Soup"
    ingredients = [
        "1 tablespoon olive oil",
        "1 onion, chopped",
        f"2 cups chopped {veg}",
        f"1/2 pound {protein}, diced",
        "4 cups chicken broth",
        f"1 teaspoon dried {herb}",
        "salt and pepper to taste",
    ]
    instructions = (
        f"Heat the oil in a large pot over medium heat. "
        f"Add the onion and cook for {minutes} minutes until soft. "
        f"Stir in the {veg} and the {protein}. "
        f"Pour in the broth and bring to a boil. "
        f"Reduce the heat and simmer for {simmer} minutes. "
        f"Season with {herb}, salt, and pepper. Serve hot with crusty bread."
    )
    return title, ingredients, instructions


def salad(rng, adj, green, veg):
    cheese = rng.choice(CHEESES)
    dressing = rng.choice(DRESSINGS)
    title = f"{adj} {veg.title()} Salad"
    ingredients = [
        f"4 cups {green}",
        f"1 cup sliced {veg}",
        f"1/2 cup {cheese}",
        f"3 tablespoons {dressing}",
        "1/4 teaspoon black pepper",
    ]
    instructions = (
        f"Wash the {green} and pat dry. "
        f"Tear the leaves into a large salad bowl. "
        f"Slice the {veg} and scatter over the greens. "
        f"Sprinkle the {cheese} on top. "
        f"Drizzle with the {dressing} and toss gently. Serve immediately."
    )
    return title, ingredients, instructions


def pasta(rng, adj, shape, extra):
    cheese = rng.choice(CHEESES)
    minutes = rng.choice([3, 4, 5, 6])
    title = f"{adj} {shape.title()} with {extra.title()}"
    ingredients = [
        f"8 ounces {shape}",
        "2 tablespoons olive oil",
        "2 cloves garlic, minced",
        f"1 cup {extra}",
        f"1/4 cup {cheese}",
        "salt to taste",
    ]
    instructions = (
        f"Cook the {shape} in a large pot of salted boiling water until tender. "
        f"Drain and reserve a little cooking water. "
        f"Heat the oil in a skillet and add the garlic. "
        f"Add the {extra} and cook for {minutes} minutes. "
        f"Toss the {shape} with the sauce, loosening with the reserved water. "
        f"Top with the {cheese} and serve warm."
    )
    return title, ingredients, instructions


def baked(rng, adj, kind, mixin):
    sugar = rng.choice(BAKE_SUGARS)
    liquid = rng.choice(BAKE_LIQUIDS)
    temp = rng.choice([325, 350, 375])
    minutes = rng.choice([18, 20, 22, 25, 30])
    title = f"{adj} {mixin.title()} {kind}"
    ingredients = [
        "2 cups all-purpose flour",
        f"3/4 cup {sugar}",
        "2 eggs",
        f"1 cup {liquid}",
        "1/2 cup melted butter",
        f"1 cup {mixin}",
        "1 teaspoon baking powder",
    ]
    instructions = (
        f"Preheat the oven to {temp} degrees. "
        f"Whisk the flour, {sugar}, and baking powder in a large bowl. "
        f"Beat the eggs with the {liquid} and the melted butter. "
        f"Fold the wet mixture into the dry ingredients. "
        f"Stir in the {mixin} until just combined. "
        f"Pour the batter into a greased pan. "
        f"Bake for {minutes} minutes until golden. Cool before serving."
    )
    return title, ingredients, instructions


def stirfry(rng, adj, protein, veg):
    title = f"{adj} {protein.title()} Stir Fry"
    grain = rng.choice(GRAINS)
    minutes = rng.choice([4, 5, 6, 8])
    ingredients = [
        f"1 pound {protein}, thinly sliced",
        f"2 cups {veg}",
        "2 tablespoons soy sauce",
        "1 tablespoon sesame oil",
        "2 cloves garlic, minced",
        "1 teaspoon grated ginger",
        f"2 cups cooked {grain}",
    ]
    instructions = (
        f"Heat the sesame oil in a wok over high heat. "
        f"Add the {protein} and sear for {minutes} minutes. "
        f"Add the garlic and ginger and stir for one minute. "
        f"Toss in the {veg} and cook until crisp and tender. "
        f"Pour in the soy sauce and stir to coat. "
        f"Serve over the {grain}."
    )
    return title, ingredients, instructions


def roast(rng, adj, main):
    herb = rng.choice(HERBS)
    temp = rng.choice([375, 400, 425])
    minutes = rng.choice([20, 25, 30, 35, 45])
    title = f"{adj} Roasted {main.title()}"
    ingredients = [
        f"2 pounds {main}",
        "3 tablespoons olive oil",
        f"1 tablespoon chopped {herb}",
        "4 cloves garlic, smashed",
        "1 lemon, quartered",
        "1 teaspoon sea salt",
    ]
    instructions = (
        f"Preheat the oven to {temp} degrees. "
        f"Toss the {main} with the oil, {herb}, and garlic. "
        f"Arrange in a single layer on a baking sheet. "
        f"Tuck the lemon quarters around the pan. "
        f"Roast for {minutes} minutes until browned. "
        f"Rest for five minutes before serving."
    )
    return title, ingredients, instructions


def sandwich(rng, adj, fill, top):
    bread = rng.choice(BREADS)
    title = f"{adj} {fill.title()} Sandwich"
    ingredients = [
        f"2 slices {bread}",
        f"4 ounces {fill}",
        f"1/2 cup {top}",
        "2 tablespoons mayonnaise",
        "1 teaspoon mustard",
    ]
    instructions = (
        f"Toast the {bread} until lightly golden. "
        f"Spread the mayonnaise and mustard on one side of each slice. "
        f"Layer the {fill} evenly over the bread. "
        f"Add the {top} and close the sandwich. "
        f"Cut in half and serve with pickles."
    )
    return title, ingredients, instructions


def cocktail(rng, adj, spirit, juice):
    title = f"{adj} {spirit.title()} Cooler"
    ingredients = [
        f"2 ounces {spirit}",
        f"4 ounces {juice}",
        "1 cup ice",
        "1 lime, cut into wedges",
        "1 teaspoon honey",
    ]
    instructions = (
        f"Fill a tall glass with the ice. "
        f"Pour the {spirit} over the ice. "
        f"Top with the {juice} and the honey. "
        f"Stir well until the glass is frosted. "
        f"Garnish with a lime wedge and serve at once."
    )
    return title, ingredients, instructions


def casserole(rng, adj, main, veg):
    cheese = rng.choice(CHEESES)
    temp = rng.choice([350, 375])
    minutes = rng.choice([25, 30, 35, 40])
    title = f"{adj} {main.title()} Casserole"
    ingredients = [
        f"2 cups cooked {main}",
        f"1 can cream of mushroom soup",
        f"2 cups {veg}",
        f"1 cup {cheese}",
        "1/2 cup breadcrumbs",
        "1 tablespoon butter",
    ]
    instructions = (
        f"Preheat the oven to {temp} degrees. "
        f"Combine the {main}, soup, and {veg} in a baking dish. "
        f"Sprinkle the {cheese} over the top. "
        f"Scatter the breadcrumbs and dot with the butter. "
        f"Bake for {minutes} minutes until bubbling. "
        f"Let stand for a few minutes before serving."
    )
    return title, ingredients, instructions


def smoothie(rng, adj, fruit_a, fruit_b):
    liquid = rng.choice(["milk", "orange juice", "coconut milk", "yogurt"])
    title = f"{adj} {fruit_a.title()} {fruit_b.title()} Smoothie"
    ingredients = [
        f"1 cup frozen {fruit_a}",
        f"1/2 cup sliced {fruit_b}",
        f"1 cup {liquid}",
        "1 tablespoon honey",
        "1/2 cup ice",
    ]
    instructions = (
        f"Place the {fruit_a} and the {fruit_b} in a blender. "
        f"Pour in the {liquid} and add the honey. "
        f"Add the ice and blend until completely smooth. "
        f"Taste and adjust the sweetness if needed. "
        f"Pour into chilled glasses and serve right away."
    )
    return title, ingredients, instructions


FRUITS = ["strawberries", "bananas", "mangoes", "blueberries", "peaches", "pineapple", "raspberries"]


def main() -> None:
    rng = random.Random(20260810)
    recipes = []
    titles = set()
    combos = set()

    def emit(builder, *slots):
        for attempt in range(400):
            adj = rng.choice(ADJECTIVES)
            picked = [rng.choice(pool) for pool in slots]
            if len(picked) == 2 and picked[0] == picked[1]:
                continue
            key = (builder.__name__, *picked)
            title, ingredients, instructions = builder(rng, adj, *picked)
            if title in titles:
                continue
            # Prefer unseen slot combinations; settle for a unique title once
            # the combination space is exhausted.
            if key in combos and attempt < 100:
                continue
            titles.add(title)
            combos.add(key)
            recipes.append({"title": title, "ingredients": ingredients,
                            "instructions": instructions})
            return
        raise RuntimeError(f"could not find a fresh combination for {builder.__name__}")

    per_kind = 26
    for _ in range(per_kind):
        emit(soup, SOUP_VEG, SOUP_PROTEIN)
        emit(salad, GREENS, SALAD_VEG)
        emit(pasta, PASTAS, PASTA_EXTRAS)
        emit(baked, BAKE_KINDS, BAKE_MIXINS)
        emit(stirfry, STIR_PROTEIN, STIR_VEG)
        emit(roast, ROAST_MAINS)
        emit(sandwich, SANDWICH_FILLS, SANDWICH_TOPS)
        emit(cocktail, SPIRITS, JUICES)
        emit(casserole, CASSEROLE_MAINS, CASSEROLE_VEG)

    for _ in range(10):
        emit(smoothie, FRUITS, FRUITS)

    # Records the filters must reject, to keep the prepare stage honest.
    broken = [
        {"title": "Plain Toast", "ingredients": ["1 slice bread"],
         "instructions": "Toast the bread until golden brown. Spread with butter and eat while warm and crisp."},
        {"title": "Boiled Egg", "ingredients": ["2 eggs", "1 pinch salt"],
         "instructions": "Boil the eggs for nine minutes then cool, peel, season, and serve."},
        {"title": "Ice Water", "ingredients": ["2 cups water", "1 cup ice"],
         "instructions": "Fill a glass with ice. Add water."},
        {"title": "Diet Crackers", "ingredients": ["10 crackers", "1 cup water"],
         "instructions": "Nutrition facts per serving: 120 calories. Arrange the crackers on a plate. Sip the water slowly between each cracker for best results."},
        {"title": "Mystery Stew", "ingredients": ["2 cups broth", "1 cup mystery meat"],
         "instructions": "Recipe by a famous chef. Combine everything in a pot. Simmer the stew for one hour and serve it piping hot with bread."},
    ]
    recipes.extend(broken)

    with open(OUT, "w", encoding="utf-8") as fh:
        for i, r in enumerate(recipes, start=1):
            fh.write(json.dumps({"id": f"r{i:04d}", **r}, ensure_ascii=False) + "\n")
    print(f"wrote {len(recipes)} recipes ({len(recipes) - len(broken)} filterable) to {OUT}")


if __name__ == "__main__":
    main()
