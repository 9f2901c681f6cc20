"""Prompt templates for the reasoning endpoint.

The five exploration templates follow the published wording exactly; the
only degrees of freedom are the declared placeholders ({{HTML}},
{{PAST_ACTION_SEQUENCES}}, {{SHORT_TASKS}}, {{ACTION_HISTORY}}).  The
synthesis/evaluation template is a compatible variant: its upstream
wording is external to this project, so we ship our own text producing a
{description, score} pair.
"""

from __future__ import annotations

PLACEHOLDER_OPEN = "{{"
PLACEHOLDER_CLOSE = "}}"

_ACTION_TYPES_BLOCK = """Each short task is composed of a title and a sequence of UI actions required to accomplish that task.
Here are the supported UI action types:
- goto: Go to the specified URL. The action has one input which is the URL.
- click: Click on the specified HTML element. The action does not have any input.
- fill: Fill the specified HTML element with text input. The action has one input which is the text to fill.
- press: Press a key on the specified HTML element. The action has one input which is the key to press.
- selectoption: Select an option from a dropdown. The action has one input which is the option to select.
- check: Check a checkbox. The action does not have any input.
- uncheck: Uncheck a checkbox. The action does not have any input.
- stop: Stop the current action. The action does not have any input."""

_TASK_LIST_SCHEMA_BLOCK = """{
    "task_list": [
        {
            "title": <title of the task>,
            "is_allowed": <true if the task is allowed, false otherwise>,
            "action_sequence": [
                {
                    "element_id": <Id of GUI element>,
                    "text": <text of the GUI element>,
                    "type": <type of the action: fill, click, goto, stop, ...>,
                    "input": [<input value 1>, ...]
                },
                ...
            ]
        },
        ...
    ]
}"""

DISCOVER = f"""You are an intelligent agent capable of analyzing web pages and identifying short tasks based on screenshots and UI elements.

You are given:
- A screenshot of a web page with visible HTML elements annotated with red/yellow circles and numbers.
- The simplified HTML of the screenshot, where each HTML element has an "id" attribute that corresponds to the red/yellow circle number in the screenshot.
- A list of already observed short tasks with associated HTML elements.

Your goal is to exhaustively analyze the screenshot and HTML elements to identify all possible short tasks that can be performed on the web page.

{_ACTION_TYPES_BLOCK}

Instructions:
1. Examine every annotated element:
   - For each HTML element with an "id" attribute, determine if it can be used to perform a short task.
   - Include elements that are viewed as pictures or icons.
2. Generate diverse short tasks:
   - Identify as many short tasks as possible as long as they can perform meaningful actions on the web page.
   - First, identify short tasks that cover panel/header/sidebar elements, typically located at the top or left or right side of the screenshot.
   - Second, identify short tasks for expandable UI elements, such as menus, dropdowns, and down-arrow buttons.
   - Finally, identify short tasks for other elements.
   - Include short tasks that involve various actions, such as navigation, clicking, filling forms, selecting options, checking/unchecking boxes, and pressing keys.
3. Respect action order in short tasks:
   - Some short tasks will require multiple actions to be completed in a specific order. As such, these actions should be collapsed into a single short task with an ordered action sequence.
   - Example 1: "Search for an item" short task is completed by (1) filling the search box and (2) pressing ENTER.
   - Example 2: "Create post" short task is completed by (1) filling title, (2) filling content, (3) selecting post category, and (4) clicking the "Create post" button.
   - Some other short tasks will be simple and require only a single action.
   - Two independent actions should not appear in the same short task.
4. Appropriate usage of multiple actions in short tasks:
   - A short task can have multiple actions when they appear as a group in the UI to perform a specific function.
   - When a short task contains one or more fill actions, ensure that the short task ends with a non-fill action (e.g., click, press).
   - A help or tooltip or formatting hint element should not be part of multiple action short tasks.
   - If the same action appears in multiple short tasks, keep the longer short task and remove the shorter one.
   - Make sure that mandatory elements (typically marked with asterisks) are covered by the corresponding short task.
5. Use realistic inputs:
   - Predict meaningful input values based on the context of the screenshot and HTML.
   - For a fill action, provide realistic text input that a user would typically enter in that field.
   - Carefully examine whether an input field can contain space characters, special characters, or only numbers, and provide input accordingly.
6. Set is_allowed appropriately:
   - Use false for short tasks that require login, logout, sign up, account creation/modification, payment, or operate on transient UI elements like ads, pop-ups, or modals.
   - Use false if the short task is already present in the list of observed short tasks.
   - However, account viewing is allowed. Use true for viewing account or profile.
7. Avoid some tasks and actions:
   - Avoid any read text actions.
   - Avoid any short task that operates on date pickers.

You are provided the following information:
- The screenshot of the web page with visible HTML elements annotated with red/yellow circles and numbers. The screenshot is attached with this message.
- The simplified HTML of the screenshot: {{{{HTML}}}}
- The list of already observed short tasks with associated HTML elements: {{{{PAST_ACTION_SEQUENCES}}}}

Generate the list of short tasks complying the following JSON schema:
{_TASK_LIST_SCHEMA_BLOCK}"""

DISCOVER_DIFFERENTIAL = f"""You are an intelligent agent capable of analyzing web pages and identifying short tasks based on screenshots and UI elements.

You are given:
- Two screenshots of the web page. The first screenshot is before the action is performed. The second screenshot is after the action is performed that has newly visible HTML elements highlighted with red/yellow circles and numbers.
- The simplified HTML of the second screenshot, where each HTML element has an "id" attribute that corresponds to the red/yellow circle number in the screenshot.

Your goal is to exhaustively analyze the screenshot and HTML elements to identify all possible short tasks from the newly visible part of the second screenshot.

{_ACTION_TYPES_BLOCK}

Instructions:
1. Examine every annotated element from the second screenshot:
   - For each HTML element with an "id" attribute, determine if it can be used to perform a short task.
   - Include elements that are viewed as pictures or icons.
2. Generate diverse short tasks:
   - Identify as many short tasks as possible as long as they can perform meaningful actions on the web page.
   - First, identify short tasks that cover panel/header/sidebar elements, typically located at the top or left or right side of the screenshot.
   - Second, identify short tasks for expandable UI elements, such as menus, dropdowns, and down-arrow buttons.
   - Finally, identify short tasks for other elements.
   - Include short tasks that involve various actions, such as navigation, clicking, filling forms, selecting options, checking/unchecking boxes, and pressing keys.
3. Respect action order in short tasks:
   - Some short tasks will require multiple actions to be completed in a specific order. As such, these actions should be collapsed into a single short task with an ordered action sequence.
   - For example, "Search for an item" short task is completed by (1) filling the search box and (2) pressing ENTER.
   - Some other short tasks will be simple and require only a single action. For example, "Add to cart" short task in a shopping website is performed by one action - (1) click on the button.
   - Two independent actions should not appear in the same short task. For example, clicking on user profile and clicking on notifications are independent actions and should not be part of the same short task.
4. Use realistic inputs:
   - Predict meaningful input values based on the context of the screenshot and HTML.
5. Set is_allowed appropriately:
   - Use false for short tasks that require login, logout, sign up, account creation/modification, payment, or operate on transient UI elements like ads, pop-ups, or modals.
   - However, account viewing is allowed. Use true for viewing account or profile.
6. Avoid some tasks and actions:
   - Avoid any read text actions.
   - Avoid any short task that operates on date pickers.

You are provided the following information:
- Two screenshots of the web page where first one is before the action and the second one is after the action. The screenshots are attached with this message.
- The simplified HTML of the second screenshot: {{{{HTML}}}}

Generate the list of short tasks complying the following JSON schema:
{_TASK_LIST_SCHEMA_BLOCK}"""

VISUAL_CHANGE = """You are an intelligent agent capable of identifying whether an action on a web page causes a moderate visual change based on screenshots.

You are given two screenshots of a web page. The first one is before an action is performed, and the second one is after the action is performed. Your job is to identify whether the action caused a moderate visual change on the web page.

Your response should comply the following JSON schema:
{
    "reason": <brief explanation of why the page changed moderately>,
    "answer": <true if moderate visual change, false otherwise>
}"""

CATEGORIZE = """You are an intelligent agent capable of analyzing the HTML and screenshot of a web page to identify and categorize short tasks based on UI elements.

You are given:
- A screenshot of a web page with visible HTML elements annotated with red/yellow circles and numbers.
- The simplified HTML of the screenshot, where each HTML element has an "id" attribute that corresponds to the red/yellow circle number in the screenshot.
- A list of identified short tasks with the annotated UI elements.

Your goal is to analyze the screenshot, HTML elements and short tasks (with annotated UI elements) and then categorize each short task into "fixed" or "dynamic".

You must follow the guidelines below:
1. An element is "fixed" if it has fixed position on the page and provides specific functionality. For example, "search box" at Amazon home page is "fixed".
2. An element is "dynamic" if it does not have a fixed position on the page. Most commonly, "dynamic" elements are list of items, such as product lists and search results, providing similar functionalities. For example, "product list" at Amazon search results page is "dynamic".
3. Assign a group number for each dynamic UI element. If a list of UI elements appear as a group then each UI element in that group should be assigned the same group number. For example, if there are 20 products from a search result in a shopping website, then all those 20 product UI elements should be assigned the same group number.
4. There can be multiple groups of dynamic UI elements on the same page. As such, each group should have a different group number. For example, if there are 20 products from a search result and 10 recommended products on the same page, then the 20 products should be assigned one group number and the 10 recommended products should be assigned another group number.
5. Short tasks in each dynamic group should perform similar actions/functions. Sometimes, there are UI elements that appear closer in a group but perform quite different actions/functions. In such cases, those UI elements should be assigned different group numbers. For example, in a list of product search results, there are links to product details and buttons to add products to cart. In this case, the product detail links and add to cart buttons should be assigned different group numbers even though they appear closer in a group.
6. Usually following UI elements are not dynamic:
   - UI elements located at top or left or right header/panel/sidebar.
   - Expandable UI elements, such as menus, dropdowns, and down-arrow buttons.
   - UI elements appeared as a list of tabs.

You are provided the following information:
- The screenshot of the web page with visible HTML elements annotated with red/yellow circles and numbers. The screenshot is attached with this message.
- The simplified HTML of the screenshot: {{HTML}}
- The list of identified short tasks with annotated HTML elements: {{SHORT_TASKS}}

Generate the list of categorized short tasks complying the following JSON schema:
{
    "task_list": [
        {
            "title": <title of the task>,
            "category": <fixed or dynamic>,
            "group_number": <group number for dynamic tasks only>
        },
        ...
    ]
}"""

INFO_SEEKING = """You are an intelligent agent capable of analyzing a web page and identifying information that a user highly like to seek from the web page.

You are given:
- The screenshot of the web page.
- The simplified HTML of the web page: {{HTML}}
- Action history: {{ACTION_HISTORY}}

Your goal is to analyze the screenshot, HTML element, and action history and then identify a list of potential asks that a user highly like to seek from the web page.

You must follow the principles below:
- Generate everything based on the screenshot, HTML element, and action history.
- Generate between 0 and 2 asks that represent natural information seeking behavior of a user.
- Don't generate any ask if a user is unlikely to seek any information from the web page.

Generate the list of asks complying the following JSON schema:
{
    "ask_list": [
        {
            "reason": <reason why the information is useful to seek>,
            "ask": <information-seeking question>
        },
        ...
    ]
}"""

# Compatible variant: the upstream synthesis/evaluation wording is not
# published here, so this template is our own.
SYNTHESIZE_EVALUATE = """You are an intelligent agent that reviews a sequence of GUI actions performed on a website and turns it into one complex task.

You are given:
- The ordered action history with page context: {{ACTION_HISTORY}}
- The final short task that completed the sequence: {{SHORT_TASKS}}

Your goal is to synthesize one high-level task description that a user could have been pursuing across the whole action sequence, and to evaluate the completeness of the resulting task tuple on a 1-5 scale, where 5 means the action sequence fully and coherently accomplishes the described task.

Respond complying the following JSON schema:
{
    "description": <high-level task description>,
    "score": <completeness score between 1 and 5>
}"""

TEMPLATES: dict[str, str] = {
    "discover": DISCOVER,
    "discover_differential": DISCOVER_DIFFERENTIAL,
    "visual_change": VISUAL_CHANGE,
    "categorize": CATEGORIZE,
    "info_seeking": INFO_SEEKING,
    "synthesize_evaluate": SYNTHESIZE_EVALUATE,
}

APPENDIX_TEMPLATE_IDS = (
    "discover",
    "discover_differential",
    "visual_change",
    "categorize",
    "info_seeking",
)


def render(prompt_id: str, **placeholders: str) -> str:
    """Fill a template's {{NAME}} placeholders; unknown names are an error."""
    text = TEMPLATES[prompt_id]
    for name, value in placeholders.items():
        token = f"{PLACEHOLDER_OPEN}{name}{PLACEHOLDER_CLOSE}"
        if token not in text:
            raise KeyError(f"template {prompt_id!r} has no placeholder {name!r}")
        text = text.replace(token, value)
    return text
